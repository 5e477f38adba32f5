"""Proof IR for the PC(Z) / PI(Z) equational systems.

A proof is a sequence of lines lhs = rhs with a justification (axiom or rule
application) and a witness.  The witness is a list of subcircuit maps, each
certifying that the subcircuit under one root is encoded identically (as an
ordered labeled DAG) to the subcircuit under another root, possibly across a
line and its premises.  Which maps a justification requires is derived from
the line itself by the checker; the witness only supplies the node pairs.

Systems: PC (division-free, no division axiom), PIdiv (division gates and the
axiom D: F * F^-1 = 1, checked syntactically only), and PCk = "correct up to
degree k" (division-free; D appears as the line F * Inv_k(F) = 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

from ..circuit import Circuit

PC = "PC"
PIDIV = "PIdiv"
PCK = "PCk"

AXIOMS = ("A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10",
          "C1", "C2", "D")
RULES = ("R1", "R2", "R3", "R4")


@dataclass(frozen=True)
class Justification:
    name: str
    premises: Tuple[int, ...] = ()

    @property
    def is_rule(self) -> bool:
        return self.name in RULES


@dataclass(frozen=True)
class SubMap:
    """Certifies subcircuit(src_root) == subcircuit(dst_root) node for node.

    src_ref / dst_ref: ("line", "lhs"|"rhs") or ("prem", k, "lhs"|"rhs") with k
    an absolute line index.  pairs maps every node of the source subcircuit to
    a node of the destination circuit, injectively, preserving labels and
    child order, and sending src_root to dst_root.
    """

    src_ref: tuple
    src_root: int
    dst_ref: tuple
    dst_root: int
    pairs: tuple


@dataclass
class ProofLine:
    lhs: Circuit
    rhs: Circuit
    just: Justification
    witness: Tuple[SubMap, ...] = ()


@dataclass
class Proof:
    lines: list = field(default_factory=list)
    system: str = PC
    k: Optional[int] = None  # degree bound for PCk
    # indices of the lines stating what the proof is a proof of
    conclusions: list = field(default_factory=list)

    def add(self, line: ProofLine) -> int:
        self.lines.append(line)
        return len(self.lines) - 1

    def __len__(self):
        return len(self.lines)

    @property
    def last(self) -> int:
        return len(self.lines) - 1

    def endpoint(self) -> ProofLine:
        return self.lines[-1]


@dataclass
class Verdict:
    ok: bool
    line: Optional[int] = None
    reason: Optional[str] = None
    trials: int = 0
    failure_bound: Optional[object] = None

    def __bool__(self):
        return self.ok


def resolve_ref(proof: Proof, line_idx: int, ref: tuple) -> Circuit:
    if ref[0] == "line":
        line = proof.lines[line_idx]
    elif ref[0] == "prem":
        if ref[1] >= line_idx:
            raise IndexError("premise index must be smaller than the line index")
        line = proof.lines[ref[1]]
        return line.lhs if ref[2] == "lhs" else line.rhs
    else:
        raise ValueError(f"bad reference {ref!r}")
    return line.lhs if ref[1] == "lhs" else line.rhs
