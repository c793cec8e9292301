import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from ris_outage.model import ConfigParseError, ValidationError
from ris_outage.sweep import (
    SweepRow,
    SweepSpec,
    agreement_report,
    emit_csv,
    emit_gnuplot,
    list_presets,
    load_preset,
    parse_grid,
    parse_methods,
    parse_preset_text,
    read_csv,
    render_csv,
    run_preset,
    run_sweep,
)

from conftest import make_scenario


def spec(**kw):
    base = dict(axis="avg_snr_lambda", grid=(0.5, 1.0, 2.0), fixed=make_scenario(), methods="mc", trials=10_000, seed=3, crn=True)
    base.update(kw)
    return SweepSpec(**base)


def test_spec_invariants():
    with pytest.raises(ValueError, match="empty"):
        spec(grid=())
    with pytest.raises(ValueError, match="increasing"):
        spec(grid=(1.0, 1.0))
    with pytest.raises(ValueError, match="divisible"):
        spec(axis="n_elements", grid=(8, 9))
    with pytest.raises(ValueError, match="axis"):
        spec(axis="colour")
    with pytest.raises(ValueError, match="method"):
        spec(methods="cf,exact")
    assert spec(methods="cf").methods == ("closed_form",)
    assert spec(methods=["monte_carlo", "cf"]).methods == ("closed_form", "monte_carlo")


def test_grid_parsing():
    assert parse_grid("1..4") == (1.0, 2.0, 3.0, 4.0)
    assert parse_grid("0.1, 0.5,2") == (0.1, 0.5, 2.0)
    assert parse_methods("mc") == ("monte_carlo",)


def test_invalid_grid_point_rejected_before_running():
    with pytest.raises(ValidationError) as exc:
        run_sweep(spec(axis="fail_prob", grid=(0.5, 1.5)))
    assert "fail_prob=1.5" in str(exc.value)


def test_failure_probability_sweep_rows():
    rows = run_sweep(spec(axis="fail_prob", grid=(0.0, 0.2, 0.5, 0.7), trials=20_000))
    assert [r.axis_value for r in rows] == [0.0, 0.2, 0.5, 0.7]
    mc = [r.outage_mc for r in rows]
    assert mc == sorted(mc)
    assert all(r.outage_cf is None and 0 <= r.outage_mc <= 1 for r in rows)


def test_crn_gives_exact_ordering_along_lambda():
    rows = run_sweep(spec(grid=(0.2, 0.4, 0.8, 1.6, 3.2), fixed=make_scenario(fail_prob=0.3)))
    mc = [r.outage_mc for r in rows]
    assert mc == sorted(mc, reverse=True)


def test_without_crn_points_use_distinct_streams():
    a = run_sweep(spec(grid=(1.0, 1.0000001), crn=False))
    b = run_sweep(spec(grid=(1.0, 1.0000001), crn=True))
    assert b[0].outage_mc == b[1].outage_mc
    assert a[0].outage_mc != a[1].outage_mc


def test_threshold_axis_shares_draws():
    rows = run_sweep(spec(axis="gamma_t", grid=tuple(np.linspace(0.5, 20, 12)), fixed=make_scenario(fail_prob=0.4)))
    mc = [r.outage_mc for r in rows]
    assert mc == sorted(mc)


def test_element_and_distance_axes():
    rows = run_sweep(spec(axis="n_elements", grid=(4, 8, 16), methods="cf"))
    assert [r.axis_value for r in rows] == [4, 8, 16] and all(r.outage_cf is not None for r in rows)
    rows = run_sweep(spec(axis="dist_user", grid=(1, 2, 4, 8)))
    mc = [r.outage_mc for r in rows]
    assert mc == sorted(mc)


def test_point_failures_do_not_abort():
    big = make_scenario(n_ris=16, blocks_per_ris=4)  # 64 candidate paths
    rows = run_sweep(spec(fixed=big, methods="cf,mc", grid=(1.0, 2.0)))
    assert len(rows) == 2
    for r in rows:
        assert r.outage_cf is None and r.outage_mc is not None
        assert "closed form failed" in r.cf_flags


def test_ill_conditioning_flags_recorded():
    rows = run_sweep(spec(fixed=make_scenario(blocks_per_ris=4), methods="cf", grid=(3.0,)))
    assert "ill-conditioned" in rows[0].cf_flags


def test_csv_single_row_cf_only(tmp_path):
    p = emit_csv([SweepRow("gamma_t", 3.0, 0.25)], tmp_path / "a.csv")
    lines = p.read_text().splitlines()
    assert lines == ["axis,axis_value,outage_cf,outage_mc,mc_ci,flags", "gamma_t,3,0.25,,,"]


def test_csv_rejects_empty(tmp_path):
    with pytest.raises(ValueError):
        emit_csv([], tmp_path / "x.csv")


def test_csv_surfaces_filesystem_errors(tmp_path):
    with pytest.raises(OSError):
        emit_csv([SweepRow("gamma_t", 1.0, 0.5)], tmp_path / "missing" / "x.csv")


def test_csv_is_byte_identical(tmp_path):
    rows = run_sweep(spec(fixed=make_scenario(fail_prob=0.2), methods="cf,mc"))
    again = run_sweep(spec(fixed=make_scenario(fail_prob=0.2), methods="cf,mc"))
    a = emit_csv(rows, tmp_path / "a.csv").read_bytes()
    b = emit_csv(again, tmp_path / "b.csv").read_bytes()
    assert a == b


finite = st.floats(min_value=0, max_value=1, allow_nan=False)


flag_text = st.text(alphabet=st.characters(min_codepoint=32, max_codepoint=126) | st.just("\n"), max_size=30)


@settings(max_examples=30, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.lists(st.tuples(finite, st.one_of(st.none(), finite), st.one_of(st.none(), finite), flag_text), min_size=50, max_size=50))
def test_csv_round_trip(tmp_path_factory, items):
    rows = [
        SweepRow("dist_user", float(i) * 0.37, cf, mc, None if mc is None else ci, flags)
        for i, (ci, cf, mc, flags) in enumerate(items)
    ]
    path = tmp_path_factory.mktemp("rt") / "r.csv"
    emit_csv(rows, path)
    assert len(path.read_bytes().split(b"\n")) - 1 >= 51
    back = read_csv(path)
    assert len(back) == 50
    for r, b in zip(rows, back):
        assert b.axis == r.axis and b.cf_flags == r.cf_flags
        for field in ("axis_value", "outage_cf", "outage_mc", "mc_ci"):
            x, y = getattr(r, field), getattr(b, field)
            assert (x is None and y is None) or y == pytest.approx(x, rel=1e-9, abs=1e-300)


def test_csv_fifty_rows_fifty_one_lines(tmp_path):
    rows = [SweepRow("fail_prob", i / 50, 0.5, 0.4, 0.01, "") for i in range(50)]
    text = emit_csv(rows, tmp_path / "f.csv").read_text()
    assert len(text.splitlines()) == 51
    assert read_csv(tmp_path / "f.csv") == rows


def test_ten_significant_digits():
    text = render_csv([SweepRow("gamma_t", 1 / 3, 2 / 3, 0.123456789012345, 1e-7)])
    assert "0.3333333333,0.6666666667,0.123456789,1e-07" in text


def test_agreement_exact_match():
    rows = [SweepRow("gamma_t", g, 0.3, 0.3, 0.01) for g in (1.0, 2.0)]
    rep = agreement_report(rows)
    assert rep.verdict == "agree" and rep.max_gap == 0.0


def test_agreement_names_divergent_point():
    ci = 0.005
    rows = [SweepRow("gamma_t", 1.0, 0.3, 0.3, ci), SweepRow("gamma_t", 2.0, 0.4 + 10 * ci, 0.4, ci), SweepRow("gamma_t", 3.0, 0.5, 0.51, ci)]
    rep = agreement_report(rows)
    assert rep.verdict == "diverge"
    assert rep.worst.axis_value == 2.0
    assert rep.worst.tolerance == 0.02
    text = rep.render()
    assert "DIVERGE" in text and "gamma_t=2" in text


def test_agreement_threshold_uses_ci():
    rows = [SweepRow("gamma_t", 1.0, 0.5, 0.45, 0.02)]
    assert agreement_report(rows).verdict == "agree"  # gap 0.05 < 3 * 0.02


def test_agreement_needs_both_methods():
    with pytest.raises(ValueError):
        agreement_report([SweepRow("gamma_t", 1.0, 0.5, None, None)])


def test_presets_ship_and_validate():
    assert list_presets() == ["fig2", "fig3", "fig4", "fig5"]
    for name in list_presets():
        p = load_preset(name)
        assert p.series and p.trials == 100_000 and p.crn
        for _, s in p.specs():
            s.point_scenarios()
    fig4 = load_preset("fig4")
    assert fig4.grid == (8, 16, 32, 48, 64)
    assert fig4.scenario.gamma_t == 3 and fig4.scenario.lambda_u == 0.05
    assert load_preset("fig2").scenario.elements_per_ris == 32


def test_preset_parse_errors():
    base = "n_ris = 1\nblocks_per_ris = 1\nelements_per_ris = 2\ntx_power_db = 0\nnoise_power_db = 0\nrho1 = 0\nrho2 = 0\nlambda_u = 1\nlambda_b = 1\nfail_prob = 0\ngamma_t = 1\ndist_user_m = 1\ndist_bs_m = 1\npathloss_exp = 2\n"
    with pytest.raises(ConfigParseError, match="sweep.axis"):
        parse_preset_text(base + "sweep.grid = 1, 2\n")
    with pytest.raises(ConfigParseError) as exc:
        parse_preset_text(base + "sweep.axis = gamma_t\nsweep.grid = 1\nsweep.colour = 2\n")
    assert exc.value.key == "sweep.colour"
    with pytest.raises(ConfigParseError) as exc:
        parse_preset_text(base + "sweep.axis = gamma_t\nsweep.grid = 1\nseries.a = rho1\n")
    assert exc.value.key == "series.a"
    p = parse_preset_text(base + "sweep.axis = gamma_t\nsweep.grid = 1, 2\nsweep.crn = no\nseries.x = rho1=0.5\n")
    assert not p.crn and p.series == (("x", {"rho1": 0.5}),)


def test_run_preset_outputs(tmp_path):
    p = load_preset("fig4")
    results = run_preset(p, tmp_path, trials=10_000)
    assert set(results) == {label for label, _ in p.series}
    names = sorted(f.name for f in tmp_path.iterdir())
    assert "fig4.gp" in names and "fig4_agreement.txt" in names
    assert sum(n.endswith(".csv") for n in names) == 4
    gp = (tmp_path / "fig4.gp").read_text()
    assert gp.count("yerrorbars") == 4 and "set datafile separator ','" in gp


def test_gnuplot_quotes(tmp_path):
    path = emit_gnuplot({"it's": "a.csv"}, tmp_path / "x.gp", title="t", xlabel="x")
    assert "'it''s (closed form)'" in path.read_text()
