import json

import numpy as np

from lattice_recon import (IndexSet, read_coefficients, read_indexset,
                           read_lattice, verify_plan_b, write_indexset,
                           write_lattice, write_values, Rank1Lattice)
from lattice_recon.cli import main


def run(*argv):
    return main([str(a) for a in argv])


def test_indexset_generation(tmp_path):
    out = tmp_path / "hc.idx"
    assert run("indexset", "--rule", "product", "--betas", "1,1",
               "--degree", "3", "--dim", "2", "-o", out) == 0
    L = read_indexset(out)
    assert len(L) == 12
    assert L.domain == "nonneg"


def test_indexset_mirror(tmp_path):
    src = tmp_path / "src.idx"
    out = tmp_path / "m.idx"
    write_indexset(IndexSet([(0, 0), (1, 2)], domain="nonneg"), src)
    assert run("indexset", "--mirror", src, "-o", out) == 0
    M = read_indexset(out)
    assert set(M) == {(0, 0), (1, 2), (-1, 2), (1, -2), (-1, -2)}


def test_indexset_report(tmp_path):
    out = tmp_path / "box.idx"
    rep = tmp_path / "box.json"
    assert run("indexset", "--rule", "max", "--betas", "1,1", "--degree",
               "2", "--dim", "2", "-o", out, "--report", rep) == 0
    report = json.loads(rep.read_text())
    assert report["downward_closed"] is True
    assert report["cardinality"] == 9
    assert report["bound_violations"] == []


def test_indexset_missing_dim_exits_2(tmp_path):
    assert run("indexset", "--rule", "max", "--betas", "1", "--degree", "2",
               "-o", tmp_path / "x.idx") == 2


def test_cbc_pipeline_with_verify(tmp_path):
    idx = tmp_path / "hc.idx"
    lat = tmp_path / "hc.lat"
    assert run("indexset", "--rule", "product", "--betas", "1,1",
               "--degree", "3", "--dim", "2", "-o", idx) == 0
    assert run("cbc", "--space", "cosine", "--goal", "reconstruction",
               "--plan", "B", "--strategy", "mixed", "-i", idx,
               "-o", lat) == 0
    lattice, c_table = read_lattice(lat)
    assert c_table is None
    L = read_indexset(idx)
    assert verify_plan_b(lattice.z, lattice.n, L).ok
    assert (tmp_path / "hc.lat.stats.json").exists()
    assert run("verify", "--space", "cosine", "--goal", "reconstruction",
               "--plan", "B", "-i", idx, "--lattice", lat) == 0


def test_cbc_composite_n_with_elimination_exits_2(tmp_path):
    idx = tmp_path / "s.idx"
    write_indexset(IndexSet([(0,), (1,)], domain="nonneg"), idx)
    assert run("cbc", "--space", "cosine", "--goal", "reconstruction",
               "--plan", "B", "--n", "4", "--strategy", "elimination",
               "-i", idx, "-o", tmp_path / "s.lat") == 2


def test_cbc_plan_c_writes_c_table(tmp_path):
    idx = tmp_path / "s.idx"
    lat = tmp_path / "s.lat"
    write_indexset(IndexSet([(0,), (1,), (2,)], domain="nonneg"), idx)
    assert run("cbc", "--space", "cosine", "--goal", "reconstruction",
               "--plan", "C", "-i", idx, "-o", lat) == 0
    lattice, c_table = read_lattice(lat)
    # plan B succeeds at the auto-selected n, so every c_k is 1
    if verify_plan_b(lattice.z, lattice.n, read_indexset(idx)).ok:
        assert set(c_table.values()) == {1}


def test_verify_rejects_bad_lattice(tmp_path):
    idx = tmp_path / "s.idx"
    lat = tmp_path / "bad.lat"
    write_indexset(IndexSet([(0,), (1,), (2,), (3,)], domain="nonneg"), idx)
    write_lattice(Rank1Lattice(3, (1,)), lat)
    assert run("verify", "--space", "cosine", "--goal", "reconstruction",
               "--plan", "B", "-i", idx, "--lattice", lat) == 1


def test_reconstruct_roundtrip(tmp_path):
    idx = tmp_path / "s.idx"
    lat = tmp_path / "s.lat"
    coeffs = tmp_path / "c.txt"
    values = tmp_path / "v.txt"
    assert run("indexset", "--rule", "sum", "--betas", "1,1", "--degree",
               "3", "--dim", "2", "-o", idx) == 0
    assert run("cbc", "--space", "cosine", "--goal", "reconstruction",
               "--plan", "B", "-i", idx, "-o", lat) == 0
    # synthesize values from random coefficients, then reconstruct
    from lattice_recon.transform import cosine_values_from_coeffs
    L = read_indexset(idx)
    lattice, _ = read_lattice(lat)
    rng = np.random.default_rng(0)
    table = {k: float(rng.standard_normal()) for k in L}
    write_values(cosine_values_from_coeffs(lattice, L, table), values)
    assert run("reconstruct", "--space", "cosine", "--plan", "B",
               "--lattice", lat, "-i", idx, "-V", values, "-o", coeffs,
               "--roundtrip") == 0
    back = read_coefficients(coeffs)
    assert max(abs(back[k] - table[k]) for k in L) < 1e-11


def test_reconstruct_wrong_length_exits_2(tmp_path):
    idx = tmp_path / "s.idx"
    lat = tmp_path / "s.lat"
    values = tmp_path / "v.txt"
    write_indexset(IndexSet([(0,), (1,)], domain="nonneg"), idx)
    assert run("cbc", "--space", "cosine", "--goal", "reconstruction",
               "--plan", "B", "-i", idx, "-o", lat) == 0
    write_values(np.zeros(3), values)
    assert run("reconstruct", "--space", "cosine", "--plan", "B",
               "--lattice", lat, "-i", idx, "-V", values,
               "-o", tmp_path / "c.txt") == 2


def test_reconstruct_aliasing_exits_4(tmp_path):
    idx = tmp_path / "s.idx"
    lat = tmp_path / "bad.lat"
    values = tmp_path / "v.txt"
    write_indexset(IndexSet([(0,), (1,), (2,), (3,)], domain="nonneg"), idx)
    write_lattice(Rank1Lattice(3, (1,)), lat)
    write_values(np.zeros(3), values)
    assert run("reconstruct", "--space", "cosine", "--plan", "B",
               "--lattice", lat, "-i", idx, "-V", values,
               "-o", tmp_path / "c.txt") == 4


def test_reconstruct_builtin_function(tmp_path):
    idx = tmp_path / "s.idx"
    lat = tmp_path / "s.lat"
    write_indexset(IndexSet([(0, 0), (1, 0), (0, 1)], domain="nonneg"), idx)
    assert run("cbc", "--space", "chebyshev", "--goal", "reconstruction",
               "--plan", "A", "-i", idx, "-o", lat) == 0
    assert run("reconstruct", "--space", "chebyshev", "--plan", "A",
               "--lattice", lat, "-i", idx, "--function", "geometric",
               "-o", tmp_path / "c.txt") == 0


def _experiment_config(tmp_path, **overrides):
    config = {
        "space": "cosine",
        "plan": "B",
        "function": "geometric",
        "seed": 0,
        "cases": [
            {"dim": 2,
             "rule": {"kind": "product", "betas": [1.0, 1.0], "degree": 3}},
            {"dim": 1,
             "rule": {"kind": "max", "betas": [1.0], "degree": 4}},
        ],
    }
    config.update(overrides)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(config))
    return path


def test_experiment_rows_satisfy_bound(tmp_path):
    cfg = _experiment_config(tmp_path)
    out = tmp_path / "out.csv"
    assert run("experiment", "--config", cfg, "-o", out) == 0
    lines = out.read_text().strip().splitlines()
    header = lines[0].split(",")
    assert header == ["d", "size", "n", "plan", "truncation_err",
                      "approx_err", "rho", "bound_slack"]
    assert len(lines) == 3
    for line in lines[1:]:
        fields = dict(zip(header, line.split(",")))
        assert float(fields["bound_slack"]) >= 0.0


def test_experiment_rerun_is_byte_identical(tmp_path):
    cfg = _experiment_config(tmp_path)
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    assert run("experiment", "--config", cfg, "-o", out1) == 0
    assert run("experiment", "--config", cfg, "-o", out2) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_experiment_unknown_function_exits_2(tmp_path):
    cfg = _experiment_config(tmp_path, function="nope")
    assert run("experiment", "--config", cfg, "-o", tmp_path / "x.csv") == 2


def test_experiment_bad_schema_exits_2(tmp_path):
    cfg = _experiment_config(tmp_path)
    data = json.loads(cfg.read_text())
    del data["cases"]
    cfg.write_text(json.dumps(data))
    assert run("experiment", "--config", cfg, "-o", tmp_path / "x.csv") == 2


def test_bundled_config_runs(tmp_path):
    assert run("experiment", "--config", "configs/cosine_planB.json",
               "-o", tmp_path / "out.csv") == 0


def test_threads_flag_accepted(tmp_path):
    out = tmp_path / "t.idx"
    assert run("indexset", "--rule", "max", "--betas", "1", "--degree", "2",
               "--dim", "1", "-o", out, "--threads", "4") == 0


def test_json_output_mode(tmp_path, capsys):
    out = tmp_path / "j.idx"
    assert run("indexset", "--rule", "max", "--betas", "1", "--degree", "2",
               "--dim", "1", "-o", out, "--json") == 0
    payload = json.loads(capsys.readouterr().out.strip())
    assert payload["indices"] == 3


def test_threads_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("LATTICE_RECON_THREADS", "3")
    out = tmp_path / "t.idx"
    assert run("indexset", "--rule", "max", "--betas", "1", "--degree", "1",
               "--dim", "1", "-o", out) == 0
    monkeypatch.setenv("LATTICE_RECON_THREADS", "-2")
    assert run("indexset", "--rule", "max", "--betas", "1", "--degree", "1",
               "--dim", "1", "-o", out) == 2


def test_plan_c_pipeline_uses_file_c_table(tmp_path):
    idx = tmp_path / "s.idx"
    lat = tmp_path / "s.lat"
    coeffs = tmp_path / "c.txt"
    write_indexset(IndexSet([(0, 0), (1, 0), (0, 1), (1, 1)],
                            domain="nonneg"), idx)
    assert run("cbc", "--space", "chebyshev", "--goal", "reconstruction",
               "--plan", "C", "-i", idx, "-o", lat) == 0
    assert run("reconstruct", "--space", "chebyshev", "--plan", "C",
               "--lattice", lat, "-i", idx, "--function", "geometric",
               "-o", coeffs) == 0
    table = read_coefficients(coeffs)
    assert table.space == "chebyshev" and len(table) == 4
    # the builtin is not supported on the set, so a value-level roundtrip
    # honestly reports the aliasing deviation
    assert run("reconstruct", "--space", "chebyshev", "--plan", "C",
               "--lattice", lat, "-i", idx, "--function", "geometric",
               "-o", coeffs, "--roundtrip", "--tolerance", "1e-8") == 1
    # in-span values round-trip exactly
    L = read_indexset(idx)
    lattice, c_table = read_lattice(lat)
    rng = np.random.default_rng(1)
    from lattice_recon.transform import chebyshev_values_from_coeffs
    table = {k: float(rng.standard_normal()) for k in L}
    values = tmp_path / "v.txt"
    write_values(chebyshev_values_from_coeffs(lattice, L, table), values)
    assert run("reconstruct", "--space", "chebyshev", "--plan", "C",
               "--lattice", lat, "-i", idx, "-V", values,
               "-o", coeffs, "--roundtrip") == 0


def test_cbc_reduce_n_and_stats_path(tmp_path):
    idx = tmp_path / "s.idx"
    lat = tmp_path / "s.lat"
    stats = tmp_path / "custom_stats.json"
    write_indexset(IndexSet([(0, 0), (1, 0), (0, 1)], domain="nonneg"), idx)
    assert run("cbc", "--space", "fourier", "--goal", "reconstruction",
               "--n", "101", "--reduce-n", "-i", idx, "-o", lat,
               "--stats", stats) == 0
    lattice, _ = read_lattice(lat)
    assert lattice.n < 101
    assert stats.exists()
    assert run("verify", "--space", "fourier", "--goal", "reconstruction",
               "-i", idx, "--lattice", lat) == 0


def test_bad_rule_parameters_exit_2(tmp_path):
    # first weight must be 1
    assert run("indexset", "--rule", "max", "--betas", "0.5", "--degree",
               "2", "--dim", "1", "-o", tmp_path / "x.idx") == 2
    # malformed index-set file
    bad = tmp_path / "bad.idx"
    bad.write_text("dim=2 domain=weird\n1 2\n")
    assert run("cbc", "--space", "fourier", "--goal", "reconstruction",
               "-i", bad, "-o", tmp_path / "x.lat") == 2
