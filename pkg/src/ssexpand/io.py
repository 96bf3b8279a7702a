"""File formats: code, graph, CLH instance and witness files (JSON text)."""
from __future__ import annotations

import json
from pathlib import Path

from .clh import CLHInstance, Witness, instance_from_dict, instance_to_dict, witness_from_dict, witness_to_dict
from .graphs import BipartiteGraph, graph_from_dict, graph_to_dict
from .pauli import PauliOp, QuditSystem, from_terms
from .stabilizer import StabilizerCode, validate


class ParseError(ValueError):
    """Malformed input; the message carries the file and location."""


def load_json(path: str | Path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def dump_json(obj, path: str | Path) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def code_to_dict(code: StabilizerCode) -> dict:
    out = {
        "d": code.d,
        "n": code.n,
        "k": code.k,
        "generators": [[{"q": q, "x": g.x_exps[q], "z": g.z_exps[q]} for q in g.support] for g in code.generators],
    }
    if any(g.phase_exp for g in code.generators):
        out["phases"] = [g.phase_exp for g in code.generators]
    return out


def generators_from_dict(data: dict, where: str = "code") -> tuple[list[PauliOp], int | None]:
    try:
        d, n = int(data["d"]), int(data["n"])
        k = int(data["k"]) if data.get("k") is not None else None
        raw = data["generators"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{where}: missing or invalid field {exc}") from exc
    system = QuditSystem(n, d)
    phases = data.get("phases") or [0] * len(raw)
    gens = []
    for i, g in enumerate(raw):
        try:
            terms = [(int(t["q"]), int(t.get("x", 0)), int(t.get("z", 0))) for t in g]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{where}: generator {i}: bad term ({exc})") from exc
        for q, _, _ in terms:
            if not 0 <= q < n:
                raise ParseError(f"{where}: generator {i}: qudit {q} out of range for n={n}")
        gens.append(from_terms(system, terms, int(phases[i])))
    return gens, k


def code_from_dict(data: dict, where: str = "code") -> StabilizerCode:
    gens, k = generators_from_dict(data, where)
    return validate(gens, k)


def load_code(path: str | Path) -> StabilizerCode:
    return code_from_dict(load_json(path), str(path))


def save_code(code: StabilizerCode, path: str | Path) -> None:
    dump_json(code_to_dict(code), path)


def load_graph(path: str | Path) -> BipartiteGraph:
    try:
        return graph_from_dict(load_json(path))
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"{path}: {exc}") from exc


def save_graph(G: BipartiteGraph, path: str | Path) -> None:
    dump_json(graph_to_dict(G), path)


def load_instance(path: str | Path) -> CLHInstance:
    try:
        return instance_from_dict(load_json(path))
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"{path}: {exc}") from exc


def save_instance(inst: CLHInstance, path: str | Path) -> None:
    dump_json(instance_to_dict(inst), path)


def load_witness(path: str | Path) -> Witness:
    try:
        return witness_from_dict(load_json(path))
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"{path}: {exc}") from exc


def save_witness(w: Witness, path: str | Path) -> None:
    dump_json(witness_to_dict(w), path)
