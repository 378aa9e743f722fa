import pytest

from driftgeom import config as cf
from driftgeom import geometry as geo
from driftgeom.errors import ConfigError, UsageError


def test_parse_full_config():
    text = """
    # hyperbolic comparison
    manifold = hyperbolic
    curvature = 1
    drift = constant   # trailing comment
    drift_direction = 0.5, -1
    radii = 0.5, 1, 2
    dirs = 8
    require_positive = yes
    boundary_params = value=2, scale=0.5
    """
    cfg = cf.parse_config(text)
    assert cfg == {"manifold": "hyperbolic", "curvature": 1.0, "drift": "constant", "drift_direction": [0.5, -1.0],
                   "radii": [0.5, 1.0, 2.0], "dirs": 8, "require_positive": True,
                   "boundary_params": {"value": 2.0, "scale": 0.5}}


@pytest.mark.parametrize("text, line", [
    ("manifold = euclidean\nnonsense line\n", 2),
    ("colour = red\n", 1),
    ("\n\ndirs =\n", 3),
    ("dirs = 4\ndirs = 5\n", 2),
    ("dirs = four\n", 1),
    ("h = nan\n", 1),
    ("require_positive = maybe\n", 1),
])
def test_errors_name_the_line(text, line):
    with pytest.raises(ConfigError) as info:
        cf.parse_config(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_load_missing_file(tmp_path):
    with pytest.raises(UsageError):
        cf.load_config(tmp_path / "absent.cfg")


def test_parse_params_rejects_bare_words():
    with pytest.raises(ValueError):
        cf.parse_params("a=1, b")


def test_builders():
    assert cf.build_manifold({}).kind == "euclidean"
    assert cf.build_manifold({"manifold": "euclidean", "dim": 3}).dim == 3
    hy = cf.build_manifold({"manifold": "hyperbolic", "domain": [-2, 2, 0.1, 4]})
    assert hy.domain.tolist() == [[-2.0, 2.0], [0.1, 4.0]]
    rot = cf.build_manifold({"manifold": "rotational", "warp": "sin", "curvature": 1.0})
    assert rot.params["warp"] == "sin"
    m = geo.euclidean(2)
    assert cf.build_drift({"drift": "rotation", "omega": 2.0}, m).params == {"omega": 2.0}
    assert cf.build_drift({"drift": "axis", "delta": 0.25}, m).params["delta"] == 0.25
    assert cf.build_drift({"drift": "grad_phi", "variant": "alternate"}, geo.paraboloid()).params == {"variant": "alternate"}
    nl = cf.build_nonlinearity({"nl": "rational", "nl_a": 2.0, "nl_b": 4.0, "nl_sigma": 1.0})
    assert nl.beta == 0.5
    for bad in ({"manifold": "torus"}, {"domain": [0, 1, 2]}):
        with pytest.raises(UsageError):
            cf.build_manifold(bad)
    with pytest.raises(UsageError):
        cf.build_drift({"drift": "constant", "drift_direction": [1, 0, 0]}, m)
    with pytest.raises(UsageError):
        cf.build_drift({"drift": "swirl"}, m)
    with pytest.raises(UsageError):
        cf.build_nonlinearity({"nl": "cubic"})
