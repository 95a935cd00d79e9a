"""File formats: games, distributions, emulation dumps, transcripts, reports.

All rationals travel as strings ("1/2", "0.25", "3") so nothing is ever
rounded on the way to disk; floats appear only as read-only convenience
fields in reports.  Parse errors name the offending file and field.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from .emulation import MultisetEmulation
from .games import Game, JointDistribution, JointStrategy, as_fraction
from .protocol import Transcript


class GameFormatError(Exception):
    """Base for all game/distribution file problems."""


class MissingFileError(GameFormatError):
    pass


class MalformedJsonError(GameFormatError):
    pass


class DimensionMismatchError(GameFormatError):
    pass


class NonRationalEntryError(GameFormatError):
    pass


def _load_json(path: str | Path) -> Any:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError as exc:
        raise MissingFileError(f"no such file: {path}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedJsonError(f"{path}: line {exc.lineno}: {exc.msg}") from exc


def _parse_matrix(raw: Any, field: str, rows: int, cols: int, where: str) -> tuple[tuple[Fraction, ...], ...]:
    if not isinstance(raw, list) or len(raw) != rows:
        raise DimensionMismatchError(f"{where}: field {field!r} must have {rows} rows")
    matrix = []
    for r, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != cols:
            raise DimensionMismatchError(
                f"{where}: field {field!r} row {r} must have {cols} entries"
            )
        parsed_row = []
        for c, entry in enumerate(row):
            try:
                parsed_row.append(as_fraction(entry))
            except (ValueError, TypeError) as exc:
                raise NonRationalEntryError(
                    f"{where}: field {field!r} entry [{r}][{c}]: {exc}"
                ) from exc
        matrix.append(tuple(parsed_row))
    return tuple(matrix)


def parse_game(obj: Mapping[str, Any], where: str = "<game>") -> Game:
    """Build a game from its JSON object form.

    Expected shape::

        {"strategies": [["A","B"], ["A","B"]],
         "u1": [["4","0"], ["0","2"]],
         "u2": [["2","0"], ["0","4"]]}
    """
    strategies = obj.get("strategies")
    if (
        not isinstance(strategies, list)
        or len(strategies) != 2
        or not all(isinstance(side, list) and side for side in strategies)
    ):
        raise DimensionMismatchError(
            f"{where}: field 'strategies' must list both players' strategy labels"
        )
    labels_1 = tuple(str(s) for s in strategies[0])
    labels_2 = tuple(str(s) for s in strategies[1])
    rows, cols = len(labels_1), len(labels_2)
    for field in ("u1", "u2"):
        if field not in obj:
            raise DimensionMismatchError(f"{where}: missing field {field!r}")
    u1 = _parse_matrix(obj["u1"], "u1", rows, cols, where)
    u2 = _parse_matrix(obj["u2"], "u2", rows, cols, where)
    return Game(labels_1, labels_2, u1, u2)


def parse_game_file(path: str | Path) -> Game:
    return parse_game(_load_json(path), where=str(path))


def game_to_json(game: Game) -> dict:
    return {
        "strategies": [list(game.strategies_1), list(game.strategies_2)],
        "u1": [[str(v) for v in row] for row in game.u1],
        "u2": [[str(v) for v in row] for row in game.u2],
    }


def _parse_cell_key(key: str, where: str) -> JointStrategy:
    parts = key.split(",")
    if len(parts) != 2:
        raise DimensionMismatchError(f"{where}: distribution key {key!r} is not 'row,col'")
    try:
        return JointStrategy(int(parts[0]), int(parts[1]))
    except ValueError as exc:
        raise NonRationalEntryError(f"{where}: distribution key {key!r}: {exc}") from exc


def parse_distribution(obj: Mapping[str, Any], where: str = "<dist>") -> JointDistribution:
    """Distribution format: ``{"probs": {"0,0": "1/2", "1,1": "1/2"}}``."""
    probs = obj.get("probs")
    if not isinstance(probs, dict):
        raise DimensionMismatchError(f"{where}: field 'probs' must be an object")
    out = {}
    for key, value in probs.items():
        cell = _parse_cell_key(key, where)
        try:
            out[cell] = as_fraction(value)
        except (ValueError, TypeError) as exc:
            raise NonRationalEntryError(f"{where}: field 'probs' entry {key!r}: {exc}") from exc
    try:
        return JointDistribution(out)
    except ValueError as exc:
        raise NonRationalEntryError(f"{where}: {exc}") from exc


def parse_distribution_file(path: str | Path) -> JointDistribution:
    return parse_distribution(_load_json(path), where=str(path))


def distribution_to_json(dist: JointDistribution) -> dict:
    return {
        "probs": {f"{s.s1},{s.s2}": str(p) for s, p in dist.items_sorted()}
    }


def emulation_to_json(em: MultisetEmulation) -> dict:
    return {
        "k": em.k,
        "table": [f"{cell.s1},{cell.s2}" for cell in em.table],
    }


def fraction_field(value: Fraction) -> dict:
    """Exact string plus a float convenience; exactness lives in the string."""
    return {"exact": str(value), "float": float(value)}


def transcript_records(transcript: Transcript) -> list[dict]:
    """JSON-lines form: one record per message plus a final summary record."""
    records = [
        {
            "kind": message.kind,
            "sender": message.sender,
            "round": message.round_index,
            "value": str(message.value),
        }
        for message in transcript.messages
    ]
    summary: dict[str, Any] = {
        "kind": "summary",
        "ell": "".join(str(b) for b in transcript.ell),
        "output": (
            f"{transcript.output.s1},{transcript.output.s2}"
            if transcript.output is not None
            else None
        ),
    }
    if transcript.payoffs is not None:
        summary["payoffs"] = [str(v) for v in transcript.payoffs]
    records.append(summary)
    return records


def write_transcript_log(path: str | Path, transcripts: list[Transcript]) -> None:
    with open(path, "w") as handle:
        for transcript in transcripts:
            for record in transcript_records(transcript):
                handle.write(json.dumps(record) + "\n")


def write_json(path: str | Path, payload: Mapping[str, Any]) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
