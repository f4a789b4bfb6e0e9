"""Tests for report writing, input loading, validation and quadrature helpers."""

import json
import math

import pytest

from src.models.params import CumulantVector
from src.settings import Settings
from src.utils.file_manager import (
    FileManagerError,
    ReportWriter,
    load_certify_config,
    load_cumulants,
    load_sample_csv,
)
from src.utils.helpers import flatten_dict, format_cell, format_duration, format_float, json_safe
from src.utils.quadrature import (
    DivergentTail,
    QuadratureError,
    QuadResult,
    geometric_edges,
    integrate,
    merge_edges,
    truncation_point,
)
from src.utils.validators import ReportValidator


def _bound_record(**overrides):
    record = {
        "record_type": "bound", "suite": "thm31", "bound_id": "T31_F", "params": {"r": 2.0},
        "lhs_sup": 1.0, "rhs": 2.0, "margin": 1.0, "pass": True,
    }
    record.update(overrides)
    return record


# ================================
# Report Writer
# ================================

class TestReportWriter:
    """JSON and CSV serialisation."""

    @pytest.mark.unit
    def test_json_sorted_and_stable(self):
        """Keys are sorted and the text is reproducible."""
        writer = ReportWriter()
        text = writer.to_json({"b": 1.5, "a": [1, 2]})
        assert text.index('"a"') < text.index('"b"')
        assert text == writer.to_json({"a": [1, 2], "b": 1.5})

    @pytest.mark.unit
    def test_json_non_finite(self):
        """NaN and infinities become strings, keeping the JSON valid."""
        data = json.loads(ReportWriter().to_json({"x": math.nan, "y": [math.inf, -math.inf]}))
        assert data == {"x": "nan", "y": ["inf", "-inf"]}

    @pytest.mark.unit
    def test_json_float_round_trip(self):
        """Floats keep every bit."""
        value = 1.0 / 3.0
        assert json.loads(ReportWriter().to_json({"v": value}))["v"] == value

    @pytest.mark.unit
    def test_csv_columns(self):
        """Nested keys are dotted, missing cells empty, floats printed with 17 digits."""
        text = ReportWriter().to_csv([{"x": 0.1, "nested": {"y": 1}, "flag": True}, {"x": None}])
        lines = text.splitlines()
        assert lines[0] == "flag,nested.y,x"
        assert lines[1] == "true,1,0.10000000000000001"
        assert lines[2] == ",,"

    @pytest.mark.unit
    def test_save_creates_directories(self, temp_directory):
        """Parent directories are created on save."""
        path = temp_directory / "deep" / "report.json"
        ReportWriter().save_json({"a": 1}, path)
        assert json.loads(path.read_text(encoding="utf-8")) == {"a": 1}


# ================================
# Loaders
# ================================

class TestLoaders:
    """Config, sample and cumulant files."""

    @pytest.mark.unit
    def test_config_formats(self, temp_directory):
        """JSON, TOML and YAML configs load to the same model."""
        (temp_directory / "c.json").write_text('{"suites": ["appA"], "threads": 2}', encoding="utf-8")
        (temp_directory / "c.toml").write_text('suites = ["appA"]\nthreads = 2\n', encoding="utf-8")
        (temp_directory / "c.yaml").write_text("suites: [appA]\nthreads: 2\n", encoding="utf-8")
        configs = [load_certify_config(temp_directory / name) for name in ("c.json", "c.toml", "c.yaml")]
        assert configs[0] == configs[1] == configs[2]
        assert configs[0].threads == 2

    @pytest.mark.unit
    def test_config_overrides(self, temp_directory):
        """Overrides win over file values."""
        path = temp_directory / "c.json"
        path.write_text('{"seed": 1}', encoding="utf-8")
        assert load_certify_config(path, {"seed": 5}).seed == 5

    @pytest.mark.unit
    @pytest.mark.parametrize("name,text", [
        ("c.ini", "[x]"),
        ("c.json", '{"unknown_key": 1}'),
        ("c.json", "[1, 2]"),
        ("c.json", "{not json"),
        ("c.yaml", "suites: [appZ]"),
    ])
    def test_config_errors(self, temp_directory, name, text):
        """Bad formats, unknown keys and invalid values raise FileManagerError."""
        path = temp_directory / name
        path.write_text(text, encoding="utf-8")
        with pytest.raises(FileManagerError):
            load_certify_config(path)

    @pytest.mark.unit
    def test_sample_with_header(self, sample_csv, laplace_sample):
        """A non-numeric first line is skipped."""
        values = load_sample_csv(sample_csv)
        assert values.size == laplace_sample.size
        assert values[0] == laplace_sample[0]

    @pytest.mark.unit
    def test_sample_without_header(self, temp_directory):
        """Plain numeric files load as they are."""
        path = temp_directory / "s.csv"
        path.write_text("1.5\n-2\n\n3e-1\n", encoding="utf-8")
        assert load_sample_csv(path).tolist() == [1.5, -2.0, 0.3]

    @pytest.mark.unit
    def test_sample_bad_value(self, temp_directory):
        """Non-numeric data rows are an error."""
        path = temp_directory / "s.csv"
        path.write_text("value\n1.0\noops\n", encoding="utf-8")
        with pytest.raises(FileManagerError):
            load_sample_csv(path)

    @pytest.mark.unit
    def test_sample_missing_file(self, temp_directory):
        """Unreadable files are reported."""
        with pytest.raises(FileManagerError):
            load_sample_csv(temp_directory / "missing.csv")

    @pytest.mark.unit
    def test_cumulants_list(self, exact_cumulant_file):
        """Lists of six cumulants with a target and a note."""
        target, kappa, note = load_cumulants(exact_cumulant_file)
        assert target.as_tuple() == (2.0, 1.0, 1.0, 0.0)
        assert kappa.kappa2 == pytest.approx(6.0)
        assert note == "exact"

    @pytest.mark.unit
    def test_cumulants_mapping(self, temp_directory):
        """Mappings fill missing orders with zero; the target is optional."""
        path = temp_directory / "k.yaml"
        path.write_text("kappa:\n  kappa2: 2.0\n  kappa4: 0.5\n", encoding="utf-8")
        target, kappa, note = load_cumulants(path)
        assert target is None and note is None
        assert kappa == CumulantVector(kappa2=2.0, kappa4=0.5)

    @pytest.mark.unit
    @pytest.mark.parametrize("document", [
        {"kappa": [0.0, 1.0, 0.0]},
        {"kappa": [0.0, -1.0, 0.0, 0.0, 0.0, 0.0]},
        {"target": {"r": 2.0}},
        {"kappa": {"kappa2": 1.0}, "target": {"r": -2.0, "sigma": 1.0}},
    ])
    def test_cumulant_errors(self, temp_directory, document):
        """Wrong lengths, negative variance, missing kappa or a bad target are rejected."""
        path = temp_directory / "k.json"
        path.write_text(json.dumps(document), encoding="utf-8")
        with pytest.raises(FileManagerError):
            load_cumulants(path)


# ================================
# Bundle Validation
# ================================

class TestReportValidator:
    """Schema checks on bundles."""

    @pytest.fixture
    def validator(self):
        return ReportValidator()

    @pytest.mark.validation
    def test_valid_bundle(self, validator):
        """A consistent bundle passes."""
        bundle = {"version": "1.0.0", "config": {}, "records": [_bound_record()], "summary": {"failures": 0}}
        assert ReportValidator.is_valid(validator.validate_bundle(bundle))

    @pytest.mark.validation
    def test_inconsistent_margin(self, validator):
        """margin must equal rhs - lhs_sup."""
        bundle = {"version": "1.0.0", "config": {}, "records": [_bound_record(margin=0.5)]}
        assert not ReportValidator.is_valid(validator.validate_bundle(bundle))

    @pytest.mark.validation
    def test_non_finite_numbers_accepted(self, validator):
        """A failed evaluation written as 'nan' is still well-formed."""
        record = _bound_record(lhs_sup="nan", margin="nan", **{"pass": False})
        bundle = {"version": "1.0.0", "config": {}, "records": [record], "summary": {"failures": 1}}
        assert ReportValidator.is_valid(validator.validate_bundle(bundle))

    @pytest.mark.validation
    @pytest.mark.parametrize("bundle", [
        {"config": {}, "records": []},
        {"version": "1.0.0", "records": []},
        {"version": "1.0.0", "config": {}, "records": {}},
        {"version": "1.0.0", "config": {}, "records": [{"record_type": "table"}]},
        {"version": "1.0.0", "config": {}, "records": [{"record_type": "bound", "suite": "thm31"}]},
        {"version": "1.0.0", "config": {}, "records": [_bound_record(rhs="big")]},
        {"version": "1.0.0", "config": {}, "records": [_bound_record()], "summary": {"failures": 2}},
    ])
    def test_invalid_bundles(self, validator, bundle):
        """Missing headers, unknown record types, missing fields and wrong counts fail."""
        assert not ReportValidator.is_valid(validator.validate_bundle(bundle))

    @pytest.mark.validation
    def test_subgrid_supremum_above_full_grid(self, validator):
        """The coarse supremum is taken over a subset of the grid, so exceeding lhs_sup is an error."""
        bundle = {"version": "1.0.0", "config": {}, "records": [_bound_record(lhs_sup_coarse=1.5)]}
        results = validator.validate_bundle(bundle)
        assert not ReportValidator.is_valid(results)
        assert any(r.check_name == "record[0].nesting" and not r.passed for r in results)

    @pytest.mark.validation
    def test_refinement_warning(self, validator):
        """A supremum that rose by more than 1% under refinement warns without invalidating."""
        record = _bound_record(lhs_sup_coarse=0.8, refinement_change=0.2)
        results = validator.validate_bundle({"version": "1.0.0", "config": {}, "records": [record]})
        assert ReportValidator.is_valid(results)
        warning = next(r for r in results if r.check_name == "record[0].refinement")
        assert not warning.passed and warning.severity == "warning"
        assert warning.details == {"refinement_change": 0.2}

    @pytest.mark.validation
    def test_resolved_supremum(self, validator):
        """A stable supremum passes the refinement check."""
        record = _bound_record(lhs_sup_coarse=0.999, refinement_change=0.001)
        results = validator.validate_bundle({"version": "1.0.0", "config": {}, "records": [record]})
        assert all(r.passed for r in results if r.check_name.startswith("record[0]"))

    @pytest.mark.validation
    def test_other_record_types(self, validator):
        """Jump, blow-up and stated-constant records only need their type."""
        records = [{"record_type": kind} for kind in ("jump", "blowup", "stated_constant")]
        assert ReportValidator.is_valid(validator.validate_bundle(
            {"version": "1.0.0", "config": {}, "records": records}))


# ================================
# Helpers
# ================================

class TestHelpers:
    """Formatting helpers."""

    @pytest.mark.unit
    def test_format_float_exact(self):
        """17 significant digits reproduce the double."""
        for value in (1.0 / 3.0, 2.0 ** -40, 123456.789, -1e-300):
            assert float(format_float(value)) == value

    @pytest.mark.unit
    def test_json_safe(self):
        """Non-finite floats are replaced recursively; others are kept."""
        assert json_safe({"a": [math.inf, 1.0], "b": (math.nan,), "c": "text"}) == {
            "a": ["inf", 1.0], "b": ["nan"], "c": "text"}

    @pytest.mark.unit
    def test_format_duration(self):
        """Seconds, minutes and hours."""
        assert format_duration(30) == "30.0s"
        assert format_duration(150) == "2m 30s"
        assert format_duration(3700) == "1h 1m"

    @pytest.mark.unit
    def test_flatten_dict(self):
        """Nested keys are dotted and scalar lists joined."""
        assert flatten_dict({"a": {"b": 1, "c": [1.0, 2.5]}, "d": "x"}) == {"a.b": 1, "a.c": "1;2.5", "d": "x"}

    @pytest.mark.unit
    def test_format_cell(self):
        """Cells for None, booleans and lists."""
        assert format_cell(None) == ""
        assert format_cell(False) == "false"
        assert format_cell([1, 0.5]) == "[1 0.5]"


# ================================
# Quadrature
# ================================

class TestQuadrature:
    """Panelled adaptive quadrature."""

    @pytest.mark.unit
    def test_integrate_panels(self):
        """Panels add up and duplicate edges are skipped."""
        result = integrate(math.exp, [0.0, 0.0, 0.5, 1.0])
        assert result.value == pytest.approx(math.e - 1.0, rel=1e-12)
        assert result.panels == 2

    @pytest.mark.unit
    def test_weighted_panel(self):
        """The cosine weight integrates cos(t) exactly."""
        result = integrate(lambda t: 1.0, [0.0, math.pi / 2.0], weight="cos", wvar=1.0)
        assert result.value == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.unit
    def test_non_finite_integrand(self):
        """NaN integrands raise instead of propagating."""
        with pytest.raises(QuadratureError):
            integrate(lambda t: math.nan, [0.0, 1.0])

    @pytest.mark.unit
    def test_quad_result_arithmetic(self):
        """Errors add and scale with the absolute factor."""
        total = QuadResult(1.0, 1e-9, 1) + QuadResult(2.0, 2e-9, 2)
        assert (total.value, total.panels) == (3.0, 3)
        scaled = total.scaled(-2.0)
        assert scaled.value == -6.0
        assert scaled.abserr == pytest.approx(6e-9)

    @pytest.mark.unit
    def test_truncation_point(self):
        """For e^{-t} the tail below 1e-14 of the peak starts near 33."""
        t = truncation_point(0.0, 1.0, 0.0, tol=1e-14)
        assert 33.0 < t < 40.0
        assert math.exp(-t) <= 1e-14

    @pytest.mark.unit
    def test_truncation_needs_decay(self):
        """Non-decaying envelopes have no truncation point."""
        with pytest.raises(DivergentTail):
            truncation_point(0.0, 0.0, 1.0)

    @pytest.mark.unit
    def test_geometric_edges(self):
        """Edges double away from the anchor in either direction."""
        assert geometric_edges(0.0, 10.0, 1.0) == [0.0, 1.0, 2.0, 4.0, 10.0]
        assert geometric_edges(0.0, -10.0, 1.0) == [-10.0, -4.0, -2.0, -1.0, 0.0]
        assert geometric_edges(3.0, 3.0, 1.0) == [3.0]

    @pytest.mark.unit
    def test_merge_edges(self):
        """Edges outside (lo, hi) are dropped, endpoints added."""
        assert merge_edges([5.0, -1.0, 2.0], [2.0], lo=0.0, hi=3.0) == [0.0, 2.0, 3.0]


# ================================
# Settings
# ================================

class TestSettings:
    """Environment-driven settings."""

    @pytest.mark.unit
    def test_environment_override(self, monkeypatch):
        """VG_STEIN_ variables override defaults."""
        monkeypatch.setenv("VG_STEIN_THREADS", "4")
        monkeypatch.setenv("VG_STEIN_LOG_LEVEL", "debug")
        settings = Settings()
        assert settings.threads == 4
        assert settings.log_level == "DEBUG"

    @pytest.mark.unit
    def test_invalid_log_level(self, monkeypatch):
        """Unknown levels are rejected."""
        monkeypatch.setenv("VG_STEIN_LOG_LEVEL", "chatty")
        with pytest.raises(ValueError):
            Settings()
