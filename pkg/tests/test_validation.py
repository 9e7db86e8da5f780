import pytest

from sphmelt.scenario import build_config, parse_sections
from sphmelt.validation import (
    ValidationError,
    check_domain,
    check_number,
    error_msg,
    scenario_check,
)
from tests.conftest import DROPLET_SCENARIO


def config_from(text):
    sections, lines = parse_sections(text)
    return build_config(sections, lines)


def messages_for(text):
    with pytest.raises(ValidationError) as exc:
        config_from(text)
    return exc.value.messages


class TestErrorMessages:
    """Test error formatting helpers."""

    def test_error_msg(self):
        assert error_msg("numerics.dx", "bad") == 'Field "numerics.dx" error: bad'

    def test_error_msg_with_line(self):
        assert error_msg("a", "b", 12).endswith("(line 12)")

    def test_validation_error_collects_messages(self):
        exc = ValidationError(["one", "two"])
        assert exc.messages == ["one", "two"]
        assert str(exc) == "one\ntwo"
        assert ValidationError("single").messages == ["single"]


class TestCheckNumber:
    """Test check_number function."""

    def test_valid(self):
        assert check_number("x", 5, gt=1, lt=10) == []

    def test_gt(self):
        (message,) = check_number("x", 1, gt=1)
        assert "must be > 1" in message

    def test_le(self):
        (message,) = check_number("x", 11, le=10)
        assert "must be <= 10" in message


class TestScenarioChecks:
    """Test cross-field scenario checks."""

    def test_valid_scenario(self):
        config = config_from(DROPLET_SCENARIO)
        assert scenario_check(config) == []

    def test_dx_must_divide_domain(self):
        text = DROPLET_SCENARIO.replace("dx = 0.1", "dx = 0.07")
        messages = messages_for(text)
        assert any("numerics.dx" in m and "multiple" in m for m in messages)

    def test_vector_length(self):
        text = DROPLET_SCENARIO.replace(
            "center = [1.2, 1.2]", "center = [1.2, 1.2, 1.2]"
        )
        messages = messages_for(text)
        assert any("region.drop.center" in m for m in messages)

    def test_unknown_material(self):
        text = DROPLET_SCENARIO.replace("material = fluid1", "material = fluid9")
        messages = messages_for(text)
        assert any("unknown material 'fluid9'" in m for m in messages)

    def test_missing_phase_numerics(self):
        text = DROPLET_SCENARIO.replace("[phase.liquid]\np0 = 1.0e4\n", "")
        messages = messages_for(text)
        assert any('"phase.liquid"' in m for m in messages)

    def test_output_interval_below_dt(self):
        text = DROPLET_SCENARIO.replace("interval = 2.0e-5", "interval = 1.0e-6")
        messages = messages_for(text)
        assert any("output.interval" in m for m in messages)

    def test_solidification_stiffness_needs_t_max(self):
        text = DROPLET_SCENARIO.replace("dt = 1.0e-5", "dt = 1.0e-5\nzeta_sl = 5.0")
        messages = messages_for(text)
        assert any("numerics.t_max" in m for m in messages)

    def test_short_periodic_axis(self):
        text = DROPLET_SCENARIO.replace("upper = [2.4, 2.4]", "upper = [0.5, 2.4]")
        messages = messages_for(text)
        assert any("periodic axis 0" in m for m in messages)

    def test_wall_temperature_side_outside_dimension(self):
        config = config_from(DROPLET_SCENARIO)
        domain = config.domain.model_copy(update={"wall_temperatures": {"z+": 300.0}})
        problems = check_domain(config.model_copy(update={"domain": domain}))
        assert any("side z+" in m for m in problems)
