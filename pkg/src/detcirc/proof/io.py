"""Deterministic text format for proofs.

Layout: a header (version, system with its degree bound, line count,
conclusion indices), then one block per line: justification record, the two
circuits in the canonical circuit format, and the witness maps.  Regenerating
a proof writes byte-identical files.
"""

from __future__ import annotations

from ..circuit import decode, encode
from .model import Justification, Proof, ProofLine, SubMap

FORMAT_VERSION = 1


def _ref_str(ref: tuple) -> str:
    if ref[0] == "line":
        return f"line:{ref[1]}"
    return f"prem:{ref[1]}:{ref[2]}"


def _parse_ref(s: str) -> tuple:
    parts = s.split(":")
    if parts[0] == "line" and len(parts) == 2 and parts[1] in ("lhs", "rhs"):
        return ("line", parts[1])
    if parts[0] == "prem" and len(parts) == 3 and parts[2] in ("lhs", "rhs"):
        return ("prem", int(parts[1]), parts[2])
    raise ValueError(f"bad witness reference {s!r}")


def encode_proof(p: Proof) -> bytes:
    out = [f"proof {FORMAT_VERSION}"]
    if p.system == "PCk":
        out.append(f"system PCk {p.k}")
    else:
        out.append(f"system {p.system}")
    out.append(f"lines {len(p.lines)}")
    out.append("conclusions " + " ".join(str(i) for i in p.conclusions))
    for idx, line in enumerate(p.lines):
        out.append(f"line {idx}")
        just = f"just {line.just.name}"
        if line.just.premises:
            just += " " + " ".join(str(q) for q in line.just.premises)
        out.append(just)
        for tag, c in (("lhs", line.lhs), ("rhs", line.rhs)):
            body = encode(c).decode("ascii")
            out.append(f"{tag} {len(body.splitlines())}")
            out.append(body.rstrip("\n"))
        out.append(f"witness {len(line.witness)}")
        for m in line.witness:
            out.append(f"map {_ref_str(m.src_ref)} {m.src_root} "
                       f"{_ref_str(m.dst_ref)} {m.dst_root} {len(m.pairs)}")
            out.append(" ".join(f"{a}:{b}" for a, b in m.pairs))
    return ("\n".join(out) + "\n").encode("ascii")


def decode_proof(data: bytes) -> Proof:
    lines = data.decode("ascii").split("\n")
    pos = 0

    def next_row() -> str:
        nonlocal pos
        while pos < len(lines) and not lines[pos].strip():
            pos += 1
        if pos >= len(lines):
            raise ValueError("truncated proof file")
        row = lines[pos]
        pos += 1
        return row

    head = next_row().split()
    if head[:1] != ["proof"] or head[1] != str(FORMAT_VERSION):
        raise ValueError("expected 'proof 1' header")
    sysrow = next_row().split()
    if sysrow[0] != "system":
        raise ValueError("expected system record")
    system = sysrow[1]
    k = int(sysrow[2]) if system == "PCk" else None
    nrow = next_row().split()
    if nrow[0] != "lines":
        raise ValueError("expected line count")
    count = int(nrow[1])
    crow = next_row().split()
    if crow[0] != "conclusions":
        raise ValueError("expected conclusions record")
    conclusions = [int(x) for x in crow[1:]]

    proof = Proof([], system, k, conclusions)
    for want in range(count):
        row = next_row().split()
        if row[:1] != ["line"] or int(row[1]) != want:
            raise ValueError(f"expected 'line {want}'")
        jrow = next_row().split()
        if jrow[0] != "just":
            raise ValueError("expected justification")
        just = Justification(jrow[1], tuple(int(x) for x in jrow[2:]))
        sides = {}
        for tag in ("lhs", "rhs"):
            trow = next_row().split()
            if trow[0] != tag:
                raise ValueError(f"expected {tag} block")
            nrows = int(trow[1])
            block = [next_row() for _ in range(nrows)]
            sides[tag] = decode(("\n".join(block) + "\n").encode("ascii"))
        wrow = next_row().split()
        if wrow[0] != "witness":
            raise ValueError("expected witness record")
        maps = []
        for _ in range(int(wrow[1])):
            mrow = next_row().split()
            if mrow[0] != "map":
                raise ValueError("expected map record")
            npairs = int(mrow[5])
            prow = next_row().split()  # maps always pair at least the roots
            if len(prow) != npairs:
                raise ValueError("wrong number of witness pairs")
            pairs = tuple(tuple(int(x) for x in pair.split(":")) for pair in prow)
            maps.append(SubMap(_parse_ref(mrow[1]), int(mrow[2]),
                               _parse_ref(mrow[3]), int(mrow[4]), pairs))
        proof.lines.append(ProofLine(sides["lhs"], sides["rhs"], just, tuple(maps)))
    return proof
