import numpy as np
import pytest

from srjsample import CSVFormatError, EmptyInputError, InvalidParameterError, generate, load_csv, normalize_and_split
from srjsample.catalog import Instance, micro_catalog
from srjsample.harness import (
    PHASES,
    normalize,
    read_pairs_csv,
    run_algorithm,
    verify_instance,
    write_pairs_csv,
    write_points_csv,
)
from srjsample.oracle import brute_force_join

from conftest import make_points


def test_points_csv_roundtrip_is_exact(tmp_path):
    ps = make_points(np.random.default_rng(0).uniform(-1e3, 1e3, size=(50, 2)), start=7)
    p = tmp_path / "p.csv"
    write_points_csv(p, ps)
    back = load_csv(p).points
    assert (back.ids == ps.ids).all() and (back.x == ps.x).all() and (back.y == ps.y).all()


@pytest.mark.parametrize(
    "body,line",
    [
        ("id,x\n1,2\n", 1),
        ("id,x,y\n1,2,3\n2,abc,4\n", 3),
        ("id,x,y\n1,2\n", 2),
        ("id,x,y\n1,2,inf\n", 2),
    ],
)
def test_csv_errors_carry_line_numbers(tmp_path, body, line):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    with pytest.raises(CSVFormatError) as e:
        load_csv(p)
    assert f"line {line}" in str(e.value)


def test_csv_duplicate_ids_empty_and_missing(tmp_path):
    p = tmp_path / "dup.csv"
    p.write_text("id,x,y\n1,0,0\n1,1,1\n")
    with pytest.raises(CSVFormatError):
        load_csv(p)
    p.write_text("")
    with pytest.raises(EmptyInputError):
        load_csv(p)
    with pytest.raises(FileNotFoundError):
        load_csv(tmp_path / "nope.csv")


def test_pairs_csv_roundtrip(tmp_path):
    p = tmp_path / "s.csv"
    write_pairs_csv(p, [1, 2], [3, 4])
    assert p.read_text() == "r_id,s_id\n1,3\n2,4\n"
    r, s = read_pairs_csv(p)
    assert r.tolist() == [1, 2] and s.tolist() == [3, 4]


def test_normalize_and_degenerate_axis():
    ps = make_points([(1, 5), (3, 5), (2, 5)])
    with pytest.warns(UserWarning):
        n = normalize(ps, 10.0)
    assert n.x.tolist() == [0.0, 10.0, 5.0] and (n.y == 0).all()


def test_split_is_seeded_partition():
    d = generate("uniform", 1000, seed=1)
    R, S = normalize_and_split(d, 0.3, seed=2)
    R2, _ = normalize_and_split(d, 0.3, seed=2)
    assert len(R) + len(S) == 1000 and (R.ids == R2.ids).all()
    assert set(R.ids).isdisjoint(S.ids)
    assert R.is_x_sorted() and S.is_x_sorted()
    assert 200 < len(R) < 400
    for bad in (0.0, 1.0, 1.5):
        with pytest.raises(InvalidParameterError):
            normalize_and_split(d, bad)


def test_generators():
    u = generate("uniform", 500, seed=3)
    assert len(u) == 500 and u.points.x.min() >= 0 and u.points.x.max() <= 10000
    g = generate("gaussian_clusters", 500, {"k": 3, "sigma": 50.0}, seed=3)
    assert "k=3" in g.source
    assert (generate("uniform", 10, seed=4).points.x == generate("uniform", 10, seed=4).points.x).all()
    with pytest.raises(InvalidParameterError):
        generate("uniform", 10, {"sigma": 1})
    with pytest.raises(InvalidParameterError):
        generate("zipf", 10)


@pytest.mark.parametrize("algo", ["bbst", "kds", "kds-rejection", "oracle"])
def test_run_algorithm_reports(uniform_small, algo):
    R, S, hx, hy = uniform_small
    batch, rep = run_algorithm(algo, R, S, hx, hy, 3000, seed=1, with_exact=True)
    truth = brute_force_join(R, S, hx, hy)
    assert len(batch) == 3000 and rep.samples == 3000
    assert rep.exact_join_size == truth.size
    keys = [k for k, _ in rep.rows()]
    assert keys[:5] == list(PHASES) and "sum_mu" in keys and "attempts" in keys
    assert rep.sum_mu >= truth.size and rep.memory_bytes > 0
    assert all(getattr(rep, p) >= 0 for p in PHASES)
    assert rep.total >= rep.sampling


def test_bench_csv_format(tmp_path, uniform_small):
    R, S, hx, hy = uniform_small
    _, rep = run_algorithm("bbst", R, S, hx, hy, 100)
    p = tmp_path / "r.csv"
    rep.write_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "key,value"
    assert [l.split(",")[0] for l in lines[1:6]] == list(PHASES)


def test_micro_catalog_is_fixed_and_small():
    a, b = micro_catalog(), micro_catalog()
    assert [i.name for i in a] == [i.name for i in b]
    names = {i.name for i in a}
    assert {"underfull_bucket", "duplicate_x"} <= names
    assert all(1 <= brute_force_join(i.R, i.S, i.hx, i.hy).size <= 8 for i in a)


def test_verify_instance_passes_on_e1(e1):
    R, S, hx, hy = e1
    res = verify_instance(Instance("e1", R, S, hx, hy), draws=20000)
    assert res.passed, res.failures
    assert res.exact_max_error < 1e-12
