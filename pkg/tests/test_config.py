import pytest

from vascnet.config import parse_config
from vascnet.errors import ConfigError, ParseError
from vascnet.model import PowerLaw, Quadratic

BASE = """\
[model]
mu = 1
alpha = 1
a = 1
b = 1

[boundary]
rho_plus = 1
phi_minus = 1.2

[pressure]
kind = quadratic
K = 2
"""


def test_minimal_config_defaults():
    cfg = parse_config(BASE)
    assert (cfg.grid.L, cfg.grid.N) == (40.0, 2000)
    assert cfg.scheme.cfl == 0.45 and cfg.scheme.diffusion_theta == 1.0
    assert cfg.scheme.well_balanced
    assert isinstance(cfg.law, Quadratic) and cfg.law.K == 2.0
    assert cfg.bdry.phi_plus == 1.0
    assert cfg.experiment["amplitude"] == 1e-2 and cfg.experiment["T_end"] == 50.0


def test_long_domain_for_slow_decay():
    cfg = parse_config(BASE.replace("K = 2", "K = 1.04"))
    assert cfg.grid.L == pytest.approx(20.0 / (1 - 1 / 1.04) ** 0.5)


def test_overrides():
    cfg = parse_config(BASE + "[grid]\nL = 80\nN = 4000\n[scheme]\nwell_balanced = no\n"
                       "diffusion_theta = 0.5\n")
    assert (cfg.grid.L, cfg.grid.N) == (80.0, 4000)
    assert not cfg.scheme.well_balanced
    assert cfg.scheme.diffusion_theta == 0.5


def test_power_law():
    cfg = parse_config(BASE.replace("kind = quadratic", "kind = power\ngamma = 3"))
    assert cfg.law == PowerLaw(2.0, 3.0)


def test_negative_mu_named():
    with pytest.raises(ConfigError) as info:
        parse_config(BASE.replace("mu = 1", "mu = -1"))
    assert any(p.startswith("mu:") for p in info.value.problems)


def test_unknown_key_named():
    with pytest.raises(ConfigError, match="viscosity"):
        parse_config(BASE + "viscosity = 3\n")


def test_errors_are_batched():
    text = BASE.replace("mu = 1", "mu = -1").replace("b = 1", "b = zero") + "[grid]\nN = 0\nfoo = 1\n"
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    names = {p.split(":")[0] for p in info.value.problems}
    assert {"mu", "b", "N", "foo"} <= names


def test_phi_plus_is_never_read():
    with pytest.raises(ConfigError, match="phi_plus"):
        parse_config(BASE.replace("phi_minus = 1.2", "phi_minus = 1.2\nphi_plus = 3"))


def test_missing_section_and_key():
    with pytest.raises(ConfigError) as info:
        parse_config(BASE.replace("[pressure]\nkind = quadratic\nK = 2\n", "").replace("alpha = 1\n", ""))
    text = str(info.value)
    assert "pressure" in text and "alpha" in text


def test_syntax_error_line_number():
    with pytest.raises(ParseError) as info:
        parse_config(BASE + "this is not valid\n")
    assert info.value.line == BASE.count("\n") + 1
    with pytest.raises(ParseError) as info:
        parse_config("mu = 1\n")
    assert info.value.line == 1


def test_duplicate_key():
    with pytest.raises(ParseError, match="duplicate"):
        parse_config(BASE + "K = 3\n")


def test_bad_choice():
    with pytest.raises(ConfigError, match="kind"):
        parse_config(BASE.replace("kind = quadratic", "kind = cubic"))
