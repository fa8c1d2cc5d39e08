import dataclasses
import math

import numpy as np
import pytest

from faultdiag import datagen
from faultdiag.datagen import (
    CHANNELS,
    CSV_HEADER,
    FAULT_SIGNATURES,
    MIN_DETECTABILITY,
    NOISE_SIGMA,
    CsvParseError,
    Dataset,
    DetectabilityError,
    FaultSpec,
    GenerationSpec,
    Scaler,
    default_generation_spec,
    detectability,
    fault_displacement,
    generate,
    load_csv,
    split_validation,
)

from conftest import tiny_spec


# ---------------------------------------------------------------------------
# spec validation


def test_default_layout_matches_the_benchmark_table():
    spec = default_generation_spec()
    assert spec.healthy_seconds == 10000
    assert spec.unlabeled_healthy_seconds == 500
    assert spec.validation_fraction == 0.06
    assert len(spec.faults) == 17
    unlabeled = sorted(f.state for f in spec.faults if f.destination == "D_U")
    held_out = sorted(f.state for f in spec.faults if f.destination == "D_T")
    assert unlabeled == [1, 6, 7, 9, 11, 12, 14, 16]
    assert held_out == [2, 3, 4, 5, 8, 10, 13, 15, 17]
    assert all(f.duration == 200 for f in spec.faults)
    spec.validate()


def test_fault_spec_canonicalizes_names_case_insensitively():
    f = FaultSpec(1, "hpc", "efficiency", 1.0)
    f.validate()
    assert f.component == "HPC"
    assert f.fault_type == "Efficiency"


@pytest.mark.parametrize("bad", [
    FaultSpec(1, "Compressor", "Efficiency", 1.0),
    FaultSpec(1, "Fan", "Leak", 1.0),
    FaultSpec(1, "Fan", "Efficiency", 1.0, flight="S9"),
    FaultSpec(1, "Fan", "Efficiency", 1.0, destination="S_T"),
    FaultSpec(1, "Fan", "Efficiency", -1.0),
    FaultSpec(1, "Fan", "Efficiency", 1.0, duration=0),
    FaultSpec(0, "Fan", "Efficiency", 1.0),
])
def test_fault_spec_rejects_invalid_fields(bad):
    with pytest.raises(ValueError):
        bad.validate()


def test_generation_spec_rejects_out_of_range_scalars():
    with pytest.raises(ValueError, match="healthy_seconds"):
        GenerationSpec(healthy_seconds=10).validate()
    with pytest.raises(ValueError, match="validation_fraction"):
        GenerationSpec(validation_fraction=0.0).validate()
    with pytest.raises(ValueError, match="noise_scale"):
        GenerationSpec(noise_scale=0.0).validate()
    dup = GenerationSpec(faults=[
        FaultSpec(1, "Fan", "Efficiency", 1.0),
        FaultSpec(1, "LPC", "Efficiency", 1.0),
    ])
    with pytest.raises(ValueError, match="duplicate"):
        dup.validate()


def test_generation_spec_json_roundtrip():
    spec = tiny_spec()
    clone = GenerationSpec.from_dict(spec.to_dict())
    assert clone == spec


def test_generation_spec_rejects_unknown_keys():
    with pytest.raises(ValueError, match="wrong_key"):
        GenerationSpec.from_dict({"wrong_key": 1})
    with pytest.raises(ValueError, match="severity"):
        GenerationSpec.from_dict({"faults": [
            {"component": "Fan", "type": "Efficiency", "magnitude": 1.0, "severity": 2},
        ]})
    with pytest.raises(ValueError, match="version"):
        GenerationSpec.from_dict({"version": 9})


def test_fault_states_default_to_list_position():
    spec = GenerationSpec.from_dict({"faults": [
        {"component": "Fan", "type": "Efficiency", "magnitude": 1.0},
        {"component": "LPC", "type": "Capacity", "magnitude": 1.5},
    ]})
    assert [f.state for f in spec.faults] == [1, 2]


# ---------------------------------------------------------------------------
# signatures and detectability


def test_every_component_type_pair_has_a_signature():
    pairs = {(c, t) for c in datagen.COMPONENTS for t in datagen.FAULT_TYPES}
    assert set(FAULT_SIGNATURES) == pairs
    for signature in FAULT_SIGNATURES.values():
        assert signature
        for name in signature:
            assert name in CHANNELS


def test_fault_displacement_is_sparse_and_scales_with_magnitude():
    one = fault_displacement(FaultSpec(1, "Fan", "Efficiency", 1.0))
    assert one[CHANNELS.index("Wf")] == pytest.approx(0.18)
    assert one[CHANNELS.index("N_LPC")] == pytest.approx(156.0)
    assert one[CHANNELS.index("VAFN")] == pytest.approx(-108.0)
    assert np.count_nonzero(one) == 3
    two = fault_displacement(FaultSpec(1, "Fan", "Efficiency", 2.0))
    assert np.allclose(two, 2.0 * one)


def test_benchmark_faults_clear_the_detectability_floor():
    for fault in default_generation_spec().faults:
        assert detectability(fault) >= MIN_DETECTABILITY


def test_detectability_norm_is_noise_relative():
    fault = FaultSpec(1, "Fan", "Efficiency", 1.0)
    delta = fault_displacement(fault)
    expected = math.sqrt(float(np.sum((delta / NOISE_SIGMA) ** 2)))
    assert detectability(fault) == pytest.approx(expected, abs=1e-12)
    assert detectability(fault, noise_scale=2.0) == pytest.approx(expected / 2.0, abs=1e-12)


def test_generate_refuses_undetectable_faults():
    spec = tiny_spec()
    spec.noise_scale = 100.0
    with pytest.raises(DetectabilityError, match="noise_scale"):
        generate(spec, seed=0)


# ---------------------------------------------------------------------------
# flight profiles and response map


def test_ou_series_has_the_requested_stationary_spread():
    rng = np.random.default_rng(0)
    x = datagen._ou_series(200_000, rng, sd=2.5)
    assert float(x.std()) == pytest.approx(2.5, rel=0.05)
    assert np.array_equal(datagen._ou_series(50, rng, sd=0.0), np.zeros(50))


def test_healthy_conditions_span_two_altitude_regimes():
    alt, mn, pla = datagen._healthy_conditions(4000, np.random.default_rng(1))
    assert abs(float(alt[:1500].mean()) - 28000.0) < 50.0
    assert abs(float(alt[-1500:].mean()) - 30500.0) < 50.0
    assert np.all((mn >= 0.722) & (mn <= 0.729))
    assert np.all((pla >= 67.0) & (pla <= 80.0))


def test_fault_conditions_stay_inside_their_flight_interval():
    for flight, ((alo, ahi), (mlo, mhi), (plo, phi)) in datagen.FLIGHT_INTERVALS.items():
        alt, mn, pla = datagen._fault_conditions(500, flight, np.random.default_rng(2))
        assert np.all((alt >= alo) & (alt <= ahi))
        assert np.all((mn >= mlo) & (mn <= mhi))
        assert np.all((pla >= plo) & (pla <= phi))


def test_response_map_static_pressure_follows_the_standard_atmosphere():
    resp = datagen._response_map(np.array([0.0]), np.array([0.0]), np.array([73.5]))
    pa = resp[0, CHANNELS.index("Pa") - 3]
    assert pa == pytest.approx(14.696, abs=1e-9)
    resp = datagen._response_map(np.array([30000.0]), np.array([0.7255]), np.array([73.5]))
    pa = resp[0, CHANNELS.index("Pa") - 3]
    assert pa == pytest.approx(4.37, abs=0.05)


def test_response_map_ram_pressure_is_consistent_with_pa_and_mach():
    alt = np.array([28000.0, 30500.0])
    mn = np.array([0.7255, 0.729])
    pla = np.array([70.0, 78.0])
    resp = datagen._response_map(alt, mn, pla)
    pa = resp[:, CHANNELS.index("Pa") - 3]
    s2 = resp[:, CHANNELS.index("S2_Pt") - 3]
    assert np.allclose(s2, pa * (1.0 + 0.2 * mn * mn) ** 3.5, atol=1e-12)


# ---------------------------------------------------------------------------
# generation


def test_generate_is_deterministic_per_seed():
    a = generate(tiny_spec(), seed=4)
    b = generate(tiny_spec(), seed=4)
    assert np.array_equal(a.X, b.X)
    assert np.array_equal(a.split, b.split)
    c = generate(tiny_spec(), seed=5)
    assert not np.array_equal(a.X, c.X)


def test_generate_produces_the_requested_layout():
    ds = generate(tiny_spec(400, 50, 60), seed=1)
    counts = ds.counts()
    n_val = round(0.06 * 400)
    assert counts == {"S_T": 400 - n_val, "S_V": n_val, "D_U": 2 * 60 + 50, "D_T": 2 * 60}
    assert set(np.unique(ds.state[ds.split == "D_T"])) == {3, 4}
    assert set(np.unique(ds.state[ds.split == "D_U"])) == {0, 1, 2}
    assert np.all(ds.h_s[ds.mask("S_T", "S_V")] == 1)
    assert np.all(ds.h_s[ds.mask("D_U", "D_T")] == -1)
    assert np.array_equal(ds.t, np.arange(ds.X.shape[0], dtype=float))


def test_default_benchmark_dataset_has_eighteen_states():
    ds = generate(seed=0)
    assert ds.counts() == {"S_T": 9400, "S_V": 600, "D_U": 2100, "D_T": 1800}
    truth_h, truth_state = ds.eval_truth()
    assert set(np.unique(truth_state)) == set(range(18))
    assert int(truth_h.sum()) == 500


def test_fault_magnitude_shifts_the_segment_without_touching_the_noise():
    base = tiny_spec()
    base.faults[0].magnitude = 0.0
    a = generate(base, seed=9)

    bumped = tiny_spec()
    bumped.faults[0].magnitude = 2.0
    b = generate(bumped, seed=9)

    moved = b.state == 1
    delta = fault_displacement(bumped.faults[0])
    assert np.array_equal(b.X[~moved], a.X[~moved])
    assert np.array_equal(b.X[moved], a.X[moved] + delta)


def test_eval_truth_flags_unlabeled_healthy_rows():
    ds = generate(tiny_spec(), seed=1)
    truth_h, truth_state = ds.eval_truth()
    assert truth_h.shape == truth_state.shape
    assert np.all((truth_state == 0) == (truth_h == 1))


def test_dataset_mask_rejects_unknown_split():
    ds = generate(tiny_spec(), seed=1)
    with pytest.raises(ValueError, match="split"):
        ds.mask("D_X")


def test_dataset_rejects_mismatched_columns():
    ds = generate(tiny_spec(), seed=1)
    with pytest.raises(ValueError, match="row count"):
        dataclasses.replace(ds, t=ds.t[:-1])


# ---------------------------------------------------------------------------
# validation split


def test_validation_split_takes_the_rounded_fraction_without_overlap():
    mask = split_validation(1000, 0.06, np.random.default_rng(0))
    assert mask.shape == (1000,)
    assert int(mask.sum()) == 60
    again = split_validation(1000, 0.06, np.random.default_rng(0))
    assert np.array_equal(mask, again)


def test_validation_split_needs_rows_on_both_sides():
    with pytest.raises(ValueError):
        split_validation(10, 0.01, np.random.default_rng(0))
    with pytest.raises(ValueError):
        split_validation(10, 0.99, np.random.default_rng(0))


# ---------------------------------------------------------------------------
# scaler


def test_scaler_maps_the_fitted_range_onto_minus_one_one():
    x = np.array([[0.0, 10.0], [5.0, 20.0], [10.0, 30.0]])
    sc = Scaler.fit(x)
    xn = sc.apply(x)
    assert np.allclose(xn.min(axis=0), -1.0, atol=1e-12)
    assert np.allclose(xn.max(axis=0), 1.0, atol=1e-12)
    assert np.max(np.abs(sc.invert(xn) - x)) < 1e-12


def test_scaler_does_not_clip_out_of_range_values():
    sc = Scaler.fit(np.array([[0.0], [1.0]]))
    assert sc.apply(np.array([[2.0]]))[0, 0] == pytest.approx(3.0, abs=1e-12)
    assert sc.apply(np.array([[-1.0]]))[0, 0] == pytest.approx(-3.0, abs=1e-12)


def test_scaler_pins_degenerate_channels_to_zero():
    sc = Scaler.fit(np.array([[2.0, 1.0], [2.0, 3.0]]))
    assert list(sc.degenerate) == [True, False]
    out = sc.apply(np.array([[2.0, 2.0], [99.0, 1.0]]))
    assert out[0, 0] == 0.0
    assert out[1, 0] == 0.0
    assert sc.invert(out)[0, 0] == 2.0


def test_scaler_roundtrips_through_json_dict():
    sc = Scaler.fit(np.random.default_rng(0).normal(size=(20, 4)))
    clone = Scaler.from_dict(sc.to_dict())
    assert np.array_equal(sc.lo, clone.lo)
    assert np.array_equal(sc.hi, clone.hi)


def test_scaler_refuses_empty_input():
    with pytest.raises(ValueError, match="zero rows"):
        Scaler.fit(np.zeros((0, 3)))


# ---------------------------------------------------------------------------
# CSV round trip


def test_csv_roundtrip_is_lossless(tmp_path):
    ds = generate(tiny_spec(), seed=3)
    path = tmp_path / "dataset.csv"
    ds.save_csv(path)
    back = load_csv(path)
    assert np.array_equal(ds.X, back.X)
    assert np.array_equal(ds.t, back.t)
    assert np.array_equal(ds.split, back.split)
    assert np.array_equal(ds.h_s, back.h_s)
    assert np.array_equal(ds.state, back.state)


def test_csv_loader_applies_a_column_rename_map(tmp_path):
    ds = generate(tiny_spec(), seed=3)
    path = tmp_path / "dataset.csv"
    ds.save_csv(path)
    text = path.read_text()
    header, rest = text.split("\n", 1)
    header = header.replace("alt", "altitude").replace("MN", "mach")
    (tmp_path / "renamed.csv").write_text(header + "\n" + rest)
    back = load_csv(tmp_path / "renamed.csv",
                    column_map={"alt": "altitude", "MN": "mach"})
    assert np.array_equal(ds.X, back.X)


def write_rows(tmp_path, rows, header=CSV_HEADER):
    path = tmp_path / "bad.csv"
    lines = [",".join(header)] + [",".join(str(v) for v in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


def good_row(**overrides):
    row = {"t": "0.0", "split": "D_U", "h_s": "?", "state": "1"}
    row.update({name: "1.0" for name in CHANNELS})
    row.update(overrides)
    return [row[c] for c in CSV_HEADER]


def test_csv_loader_reports_the_failing_line(tmp_path):
    path = write_rows(tmp_path, [good_row(), good_row(Wf="not-a-number")])
    with pytest.raises(CsvParseError, match="line 3") as exc:
        load_csv(path)
    assert exc.value.line == 3


def test_csv_loader_rejects_missing_columns(tmp_path):
    header = [c for c in CSV_HEADER if c != "PLA"]
    path = write_rows(tmp_path, [], header=header)
    with pytest.raises(CsvParseError, match="PLA") as exc:
        load_csv(path)
    assert exc.value.line == 1


@pytest.mark.parametrize("override, fragment", [
    ({"split": "TRAIN"}, "split tag"),
    ({"h_s": "2"}, "h_s"),
    ({"state": "-3"}, "state"),
    ({"state": "x"}, "state"),
])
def test_csv_loader_rejects_bad_tags(tmp_path, override, fragment):
    path = write_rows(tmp_path, [good_row(**override)])
    with pytest.raises(CsvParseError, match=fragment) as exc:
        load_csv(path)
    assert exc.value.line == 2


def test_csv_loader_enforces_labeled_split_invariants(tmp_path):
    path = write_rows(tmp_path, [good_row(split="S_T", h_s="1", state="2")])
    with pytest.raises(CsvParseError, match="S_T/S_V"):
        load_csv(path)
    path = write_rows(tmp_path, [good_row(split="S_V", h_s="0", state="0")])
    with pytest.raises(CsvParseError, match="S_T/S_V"):
        load_csv(path)


def test_csv_loader_rejects_truncated_rows(tmp_path):
    path = write_rows(tmp_path, [good_row()[:-2]])
    with pytest.raises(CsvParseError, match="fields"):
        load_csv(path)


def test_csv_loader_rejects_empty_and_headerless_files(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(CsvParseError, match="empty"):
        load_csv(empty)
    header_only = write_rows(tmp_path, [])
    with pytest.raises(CsvParseError, match="no data rows"):
        load_csv(header_only)
