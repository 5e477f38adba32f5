import json
import subprocess
import sys

from detcirc import formats
from detcirc.evaluate import SparsePoly
from detcirc.passes import build_taydet_sharp, simplify_zeros
from detcirc.proof.generators import prove_triangular
from detcirc.proof.io import decode_proof, encode_proof


def run_cli(*args, cwd):
    return subprocess.run([sys.executable, "-m", "detcirc.cli", *args],
                          capture_output=True, text=True, cwd=cwd)


def test_matrix_roundtrip():
    m = [[1, -2], [30, 4]]
    assert formats.decode_matrix(formats.encode_matrix(m)) == m


def test_assignment_roundtrip():
    a = {0: -5, 3: 7}
    assert formats.decode_assignment(formats.encode_assignment(a)) == a


def test_poly_roundtrip():
    p = SparsePoly(3, {(1, 0, 2): -4, (0, 0, 0): 9})
    assert formats.decode_poly(formats.encode_poly(p)) == p


def test_trace_format():
    _, trace = simplify_zeros(build_taydet_sharp(1))
    text = formats.encode_trace(trace)
    assert text.startswith("trace ")
    assert len(text.splitlines()) == len(trace) + 1


def test_proof_roundtrip_and_determinism():
    p = prove_triangular(2)
    data = encode_proof(p)
    assert encode_proof(decode_proof(data)) == data
    assert encode_proof(prove_triangular(2)) == data


def test_cli_build_eval_oracle(tmp_path):
    r = run_cli("build", "det-inv", "--n", "3", "-o", "d3.circ", cwd=tmp_path)
    assert r.returncode == 0, r.stderr
    (tmp_path / "m.txt").write_text(formats.encode_matrix([[2, 0, 0], [0, 3, 0], [0, 0, 5]]))
    r = run_cli("eval", "-i", "d3.circ", "--matrix", "m.txt", cwd=tmp_path)
    assert r.returncode == 0 and r.stdout.strip() == "30"
    r = run_cli("oracle", "det", "--matrix", "m.txt", cwd=tmp_path)
    assert r.stdout.strip() == "30"
    r = run_cli("oracle", "charpoly", "--matrix", "m.txt", cwd=tmp_path)
    assert r.stdout.split() == ["-30", "31", "-10", "1"]


def test_cli_determinism(tmp_path):
    for name in ("a.circ", "b.circ"):
        r = run_cli("build", "taydet-sharp", "--n", "2", "-o", name, cwd=tmp_path)
        assert r.returncode == 0, r.stderr
    assert (tmp_path / "a.circ").read_bytes() == (tmp_path / "b.circ").read_bytes()
    # manifests identical except timings
    ma = json.loads((tmp_path / "a.circ.manifest.json").read_text())
    mb = json.loads((tmp_path / "b.circ.manifest.json").read_text())
    ma.pop("timings"), mb.pop("timings")
    ma.pop("outputs"), mb.pop("outputs")  # carry the chosen file names
    assert ma == mb


def test_cli_pass_pipeline(tmp_path):
    run_cli("build", "taydet", "--n", "2", "-o", "t.circ", cwd=tmp_path)
    r = run_cli("pass", "normalize-div", "-i", "t.circ", "-o", "n.circ", cwd=tmp_path)
    assert r.returncode == 0, r.stderr
    rho = {j: 1 if j in (0, 3) else 0 for j in range(5)}
    (tmp_path / "rho.txt").write_text(formats.encode_assignment(rho))
    r = run_cli("pass", "eliminate-div", "-i", "t.circ", "-o", "e.circ",
                "--rho", "rho.txt", "--k", "4", cwd=tmp_path)
    assert r.returncode == 0, r.stderr
    r = run_cli("pass", "homogenize", "-i", "e.circ", "-o", "h.circ", "--d", "3", cwd=tmp_path)
    assert r.returncode == 0, r.stderr
    assert (tmp_path / "h.circ.ann").exists()


def test_cli_prove_check_and_corruption(tmp_path):
    r = run_cli("prove", "xxinv", "--n", "2", "-o", "x.proof", cwd=tmp_path)
    assert r.returncode == 0, r.stderr
    r = run_cli("check", "-i", "x.proof", "--mode", "semantic", "--trials", "5", cwd=tmp_path)
    assert r.returncode == 0 and "ok" in r.stdout
    # corrupt one witness pair
    p = decode_proof((tmp_path / "x.proof").read_bytes())
    from detcirc.proof.model import SubMap
    line = p.lines[10]
    m0 = line.witness[0]
    pairs = list(m0.pairs)
    pairs[0] = (pairs[0][0], (pairs[0][1] + 1) % line.rhs.size)
    line.witness = (SubMap(m0.src_ref, m0.src_root, m0.dst_ref, m0.dst_root,
                           tuple(pairs)),) + tuple(line.witness[1:])
    (tmp_path / "bad.proof").write_bytes(encode_proof(p))
    r = run_cli("check", "-i", "bad.proof", cwd=tmp_path)
    assert r.returncode == 1 and "line 10" in r.stdout


def test_cli_stats_report_and_figure(tmp_path):
    run_cli("build", "det-balanced", "--n", "2", "-o", "b.circ", cwd=tmp_path)
    r = run_cli("stats", "-i", "b.circ", "-o", "stats.tsv", "--plot", "stats.png",
                cwd=tmp_path)
    assert r.returncode == 0, r.stderr
    body = (tmp_path / "stats.tsv").read_text()
    assert body.startswith("metric\tvalue")
    assert (tmp_path / "stats.png").stat().st_size > 1000


def test_cli_balance_report(tmp_path):
    run_cli("build", "taydet-sharp-prime", "--n", "2", "-o", "p.circ", cwd=tmp_path)
    r = run_cli("pass", "homogenize", "-i", "p.circ", "-o", "h.circ",
                "--d", "5", "--prime", cwd=tmp_path)
    assert r.returncode == 0, r.stderr
    r = run_cli("pass", "balance", "-i", "h.circ", "-o", "bal.circ",
                "--ann", "h.circ.ann", cwd=tmp_path)
    assert r.returncode == 0, r.stderr
    report = (tmp_path / "bal.circ.report.tsv").read_text().splitlines()
    assert report[0].split("\t") == ["circuit", "s", "d", "depth_before",
                                     "depth_after", "size_after"]
    assert len(report) == 2


def test_cli_transform_proof_chain(tmp_path):
    r = run_cli("prove", "triangular", "--n", "1", "-o", "t.proof", cwd=tmp_path)
    assert r.returncode == 0, r.stderr
    r = run_cli("transform-proof", "normalize", "-i", "t.proof", "-o", "n.proof",
                cwd=tmp_path)
    assert r.returncode == 0, r.stderr
    r = run_cli("transform-proof", "eliminate-div", "-i", "n.proof", "--k", "2",
                "-o", "e.proof", cwd=tmp_path)
    assert r.returncode == 0, r.stderr
    r = run_cli("transform-proof", "homogenize", "-i", "e.proof", "--d", "1",
                "-o", "h", cwd=tmp_path)
    assert r.returncode == 0, r.stderr
    for i in (0, 1):
        r = run_cli("check", "-i", f"h.hom{i}", cwd=tmp_path)
        assert r.returncode == 0, r.stdout
    r = run_cli("prove", "pipeline-identity2", "--n", "1", "-o", "p.proof", cwd=tmp_path)
    assert r.returncode == 0, r.stderr
    r = run_cli("check", "-i", "p.proof.hom1", cwd=tmp_path)
    assert r.returncode == 0


def test_cli_oracle_expand(tmp_path):
    run_cli("build", "taydet-sharp", "--n", "2", "-o", "t.circ", cwd=tmp_path)
    r = run_cli("oracle", "expand", "-i", "t.circ", "--cap", "100000",
                "-o", "p.txt", cwd=tmp_path)
    assert r.returncode == 0, r.stderr
    poly = formats.decode_poly((tmp_path / "p.txt").read_text())
    want = {(1, 0, 0, 1, 0): 1, (0, 1, 1, 0, 0): -1}
    assert poly.terms == want
    # cap exceeded is a sized abort, exit 1
    r = run_cli("oracle", "expand", "-i", "t.circ", "--cap", "1", cwd=tmp_path)
    assert r.returncode == 1


def test_cli_usage_errors(tmp_path):
    r = run_cli("build", "nonsense", "--n", "2", "-o", "x", cwd=tmp_path)
    assert r.returncode == 2
    (tmp_path / "garbage.circ").write_text("not a circuit\n")
    r = run_cli("stats", "-i", "garbage.circ", cwd=tmp_path)
    assert r.returncode == 2
