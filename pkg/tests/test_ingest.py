import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinorzeta.errors import DataFormatError, MissingPrimeError
from spinorzeta.ingest import (
    SyntheticSpec,
    csv_text,
    dumps_eigenform,
    gen_sk,
    gen_tempered,
    gen_trivial,
    json_text,
    load,
    parse_eigenvalue_text,
    save,
    to_eigenform,
)
from spinorzeta.satake import LocalFactor, is_tempered
from spinorzeta.voronoi import VoronoiEvaluation
from spinorzeta.detector import WindowScan

HEADER = "# label=demo k=20 convention={conv} prime_bound={pb}\n"


def _write(tmp_path, body, conv="lambda", pb=3, name="f.txt"):
    path = tmp_path / name
    path.write_text(HEADER.format(conv=conv, pb=pb) + body)
    return path


def test_lambda_rows_give_trivial_locals(tmp_path):
    F = load(_write(tmp_path, "2 4 9.5\n3 4 29/3\n"))
    for p in (2, 3):
        assert (F.local(p).e1, F.local(p).e2) == (4, 6)
    F = load(_write(tmp_path, "2 4 9.5\n3 4 9.666666666666666\n"))
    assert float(F.local(3).e2) == pytest.approx(6, abs=1e-14)


def test_e1e2_pass_through(tmp_path):
    F = load(_write(tmp_path, "2 0 0\n", conv="e1e2", pb=2))
    assert F.local(2) == LocalFactor(2, 0, 0)


@pytest.mark.parametrize(
    "text, line, msg",
    [
        ("", None, "empty"),
        (HEADER.format(conv="lambda", pb=3), None, "no data rows"),
        ("2 4 9.5\n", 1, "missing header"),
        (HEADER.format(conv="lambda", pb=3) + "2 4 9.5\n3 4\n", 3, "expected 3 fields"),
        (HEADER.format(conv="lambda", pb=3) + "2 4 9.5\n3 4 abc\n", 3, "malformed"),
        (HEADER.format(conv="lambda", pb=3) + "3 4 9.5\n2 4 9.5\n", 3, "not increasing"),
        (HEADER.format(conv="lambda", pb=3) + "2 4 inf\n3 4 1\n", 2, "malformed"),
        ("# label=x k=20 convention=other prime_bound=3\n2 1 1\n", 1, "convention"),
        ("# label=x k=20 prime_bound=3\n2 1 1\n", 1, "lacks"),
    ],
)
def test_format_errors(text, line, msg):
    with pytest.raises(DataFormatError) as exc:
        parse_eigenvalue_text(text, "in.txt")
    assert msg in str(exc.value)
    assert exc.value.line == line
    if line is not None:
        assert f"in.txt:{line}:" in str(exc.value)


def test_gap_names_missing_prime():
    with pytest.raises(MissingPrimeError) as exc:
        parse_eigenvalue_text(HEADER.format(conv="lambda", pb=7) + "2 4 9.5\n3 4 1\n7 1 1\n")
    assert exc.value.p == 5
    assert "5" in str(exc.value)


def test_extra_nonprime_row_rejected():
    with pytest.raises(DataFormatError):
        parse_eigenvalue_text(HEADER.format(conv="e1e2", pb=3) + "2 1 1\n3 1 1\n4 1 1\n")


@pytest.mark.parametrize("conv", ["e1e2", "lambda"])
def test_round_trip_bit_for_bit(tmp_path, conv):
    F = gen_tempered(5, 500)
    path = tmp_path / "t.txt"
    save(F, path, conv)
    G = load(path)
    if conv == "e1e2":
        assert G.locals == F.locals
    else:
        for p in F.locals:
            assert float(G.local(p).e1) == float(F.local(p).e1)
            assert float(G.local(p).e2) == pytest.approx(float(F.local(p).e2), abs=1e-12)
    assert dumps_eigenform(G, conv) == path.read_text() or conv == "lambda"


def test_exact_round_trip_keeps_fractions(tmp_path):
    F = gen_trivial(50)
    path = tmp_path / "t.txt"
    save(F, path, "lambda")
    G = load(path)
    assert G.locals == F.locals and G.is_exact
    assert "29/3" in path.read_text()


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.integers(2, 400))
def test_convention_equivalence(seed, bound):
    F = gen_tempered(seed, bound)
    a = to_eigenform(parse_eigenvalue_text(dumps_eigenform(F, "lambda")))
    b = to_eigenform(parse_eigenvalue_text(dumps_eigenform(F, "e1e2")))
    for p in F.locals:
        assert float(a.local(p).e1) == pytest.approx(float(b.local(p).e1), abs=1e-12)
        assert float(a.local(p).e2) == pytest.approx(float(b.local(p).e2), abs=1e-12)


@pytest.mark.parametrize("text", ["tempered:3", "sk:1", "trivial"])
def test_synthetic_determinism(text):
    spec = SyntheticSpec.parse(text)
    assert dumps_eigenform(spec.build(300)) == dumps_eigenform(SyntheticSpec.parse(text).build(300))


def test_different_seeds_differ():
    assert dumps_eigenform(gen_tempered(1, 100)) != dumps_eigenform(gen_tempered(2, 100))


def test_gen_tempered_examples():
    F = gen_tempered(0, 50, overrides={2: (0.0, 0.0), 3: (math.pi / 2, math.pi / 2)})
    assert (F.local(2).e1, F.local(2).e2) == (4, 6)
    assert F.local(3).e1 == pytest.approx(0, abs=1e-15)
    assert F.local(3).e2 == pytest.approx(2, abs=1e-15)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31))
def test_gen_tempered_is_tempered(seed):
    F = gen_tempered(seed, 300)
    assert all(is_tempered(f, tol=1e-8) for f in F.locals.values())


def test_gen_sk_examples():
    F = gen_sk(200, angles=[math.pi / 2] * 46)
    for p, f in F.locals.items():
        s = math.sqrt(p) + 1 / math.sqrt(p)
        assert f.e1 == pytest.approx(s, rel=1e-15)
        assert f.e2 == pytest.approx(2, rel=1e-15)
    G = gen_sk(2000, seed=4)
    # sqrt(p) + 1/sqrt(p) > 2 >= -2 cos(theta) only gives e1 > 0; e1 > 2 fails near theta = pi
    e1 = np.array([float(f.e1) for f in G.locals.values()])
    assert np.all(e1 > 0) and e1.min() < 2
    assert not any(is_tempered(f) for f in G.locals.values())
    with pytest.raises(ValueError):
        gen_sk(100, seed=1, weight=21)
    with pytest.raises(ValueError):
        gen_sk(100)


def test_gen_trivial_is_tempered():
    assert all(is_tempered(f) for f in gen_trivial(100).locals.values())


def test_classical_normalization(tmp_path):
    k = 20
    rows = []
    for p in (2, 3):
        lam1, lam2 = Fraction(4), Fraction(16) - 6 - Fraction(1, p)
        c1 = float(lam1) * p ** (k - 1.5)
        c2 = float(lam2) * p ** (2 * (k - 1.5))
        rows.append(f"{p} {c1!r} {c2!r}\n")
    path = _write(tmp_path, "".join(rows))
    F = load(path, classical=True)
    for p in (2, 3):
        assert float(F.local(p).e1) == pytest.approx(4, rel=1e-12)
        assert float(F.local(p).e2) == pytest.approx(6, rel=1e-10)
    # without the flag the values are taken as already normalised
    assert float(load(path).local(3).e1) > 1e8


def test_csv_schemas():
    ev = VoronoiEvaluation(x=10.0, M=3, exact=89.0, main_term=1.0 / 3, residual=88.0, T=7.5)
    lines = csv_text([ev]).splitlines()
    assert lines[0] == "x,M,T,exact,main_term,residual"
    assert lines[1].split(",")[4] == format(1 / 3, ".17g")
    assert float(lines[1].split(",")[4]) == 1 / 3
    ws = WindowScan(100.0, 3.0, (100.0, 194.8), 5, 4, 1, 5.1)
    assert csv_text([ws]).splitlines()[0] == "x,c,plus,minus,zero,lower_target"
    assert csv_text([]) == ""


def test_json_round_trip_values():
    ev = VoronoiEvaluation(x=10.0, M=3, exact=89.0, main_term=0.1 + 0.2, residual=math.nan, T=7.5)
    d = json.loads(json_text(ev))
    assert list(d) == ["x", "M", "T", "exact", "main_term", "residual"]
    assert d["main_term"] == 0.1 + 0.2 and d["residual"] == "nan"
    assert json.loads(json_text({"arr": np.arange(3)})) == {"arr": [0, 1, 2]}
