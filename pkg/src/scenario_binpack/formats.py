#!/usr/bin/env python3
"""Instance text format and solution records.

Instance files are UTF-8 text::

    # optional comments; a "# name: <label>" comment names the instance
    n d W
    s_1 m_1 k_1 ... k_m      (scenario indices are 1-based)
    ...

Solution records are JSON documents produced from ``SolutionRecord``.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from pydantic import ValidationError

from .core import ensure_feasible, val_bpps, val_vbpp
from .exceptions import InstanceFormatError
from .models import Instance, Solution, SolutionRecord

NAME_PREFIX = "# name:"


def _ints(tokens: List[str], line_no: int) -> List[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise InstanceFormatError(f"expected integers, got {' '.join(tokens)!r}", line_no)


def parse_instance(text: str, name: Optional[str] = None) -> Instance:
    """Parse an instance from its text form.

    Args:
        text: File contents.
        name: Label used when the text carries no ``# name:`` comment.

    Returns:
        The parsed Instance.

    Raises:
        InstanceFormatError: On malformed lines, out-of-range indices, empty
            scenario sets or a wrong number of item lines.
    """
    data: List[Tuple[int, List[str]]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(NAME_PREFIX):
            name = line[len(NAME_PREFIX):].strip() or name
            continue
        if line.startswith("#"):
            continue
        data.append((line_no, line.split()))

    if not data:
        raise InstanceFormatError("missing header line 'n d W'", 1)
    header_no, header = data[0]
    if len(header) != 3:
        raise InstanceFormatError("header must be 'n d W'", header_no)
    n, d, W = _ints(header, header_no)
    if n < 0 or d < 1 or W < 1:
        raise InstanceFormatError(f"invalid header values n={n} d={d} W={W}", header_no)

    items = data[1:]
    if len(items) != n:
        last = items[-1][0] if items else header_no
        raise InstanceFormatError(f"expected {n} item lines, found {len(items)}", last)

    sizes: List[int] = []
    scenarios = []
    for line_no, tokens in items:
        values = _ints(tokens, line_no)
        if len(values) < 2:
            raise InstanceFormatError("item line must be 's m k_1 ... k_m'", line_no)
        size, m, ks = values[0], values[1], values[2:]
        if m != len(ks):
            raise InstanceFormatError(
                f"scenario count {m} does not match {len(ks)} indices", line_no
            )
        if m == 0:
            raise InstanceFormatError("empty scenario set", line_no)
        if not 1 <= size <= W:
            raise InstanceFormatError(f"size {size} outside [1, {W}]", line_no)
        for k in ks:
            if not 1 <= k <= d:
                raise InstanceFormatError(f"scenario index {k} outside [1, {d}]", line_no)
        if len(set(ks)) != len(ks):
            raise InstanceFormatError("repeated scenario index", line_no)
        sizes.append(size)
        scenarios.append(frozenset(k - 1 for k in ks))

    try:
        return Instance(
            n=n, d=d, capacity=W, sizes=tuple(sizes), scenarios=tuple(scenarios), name=name
        )
    except ValidationError as e:
        raise InstanceFormatError(str(e), header_no)


def serialize_instance(instance: Instance) -> str:
    """Render an instance in the text format (inverse of parse_instance)."""
    lines = []
    if instance.name:
        lines.append(f"{NAME_PREFIX} {instance.name}")
    lines.append(f"{instance.n} {instance.d} {instance.capacity}")
    for size, scen in zip(instance.sizes, instance.scenarios):
        ks = " ".join(str(k + 1) for k in sorted(scen))
        lines.append(f"{size} {len(scen)} {ks}")
    return "\n".join(lines) + "\n"


def read_instance(path: Path | str) -> Instance:
    path = Path(path)
    return parse_instance(path.read_text(encoding="utf-8"), name=path.stem)


def write_instance(instance: Instance, path: Path | str) -> Path:
    path = Path(path)
    path.write_text(serialize_instance(instance), encoding="utf-8")
    return path


def make_record(
    instance: Instance,
    solution: Solution,
    algorithm: str,
    time_s: float,
    status: str,
    lower_bound: Optional[int] = None,
    metadata: Optional[Dict[str, Any]] = None,
) -> SolutionRecord:
    """Build a SolutionRecord, rejecting infeasible solutions."""
    ensure_feasible(instance, solution)
    return SolutionRecord(
        instance=instance.name,
        algorithm=algorithm,
        bins=[list(b) for b in solution.bins],
        val_bpps=val_bpps(instance, solution),
        val_vbpp=val_vbpp(solution),
        time_s=time_s,
        status=status,
        lower_bound=lower_bound,
        metadata=metadata or {},
    )


def serialize_solution(
    instance: Instance,
    solution: Solution,
    metadata: Dict[str, Any],
) -> str:
    """Serialize a solution with its run metadata as a JSON record.

    ``metadata`` must carry ``algorithm``, ``time_s`` and ``status``; it may
    carry ``lower_bound``. Any other keys land in the record's metadata map.

    Raises:
        InfeasibleSolutionError: If the solution is infeasible.
    """
    meta = dict(metadata)
    record = make_record(
        instance,
        solution,
        algorithm=meta.pop("algorithm"),
        time_s=float(meta.pop("time_s")),
        status=meta.pop("status"),
        lower_bound=meta.pop("lower_bound", None),
        metadata=meta,
    )
    return record.model_dump_json(indent=2)


def parse_solution_record(text: str) -> SolutionRecord:
    return SolutionRecord.model_validate_json(text)
