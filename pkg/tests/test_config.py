import pytest

from app.errors import ConfigError, OutputError
from app.features.fftie import QubitState, TimeAxis
from app.tools.config import load_config, parse_config, parse_entries
from app.tools.types import RunConfig

FULL_CONFIG = """
# J_q_tau scan point
L = 5
J_q_tau = 0.004
U_tau_site = [0, 0.1, 0, 0, -0.1]   # per site
qubit_state = plus
upsilon_bits = 0b00011
disorder_range = [0, 3]
time_axis = exclude_erasure
n_cycles = 07
n_trajectories = 4
master_seed = 42
run_name = "scan point"
plot = true
"""


def test_parse_full_config():
    config = parse_config(FULL_CONFIG)
    assert config.L == 5
    assert config.J_q_tau == 0.004
    assert config.U_tau_site == [0.0, 0.1, 0.0, 0.0, -0.1]
    assert config.U_upsilon_site is None
    assert config.qubit_state is QubitState.PLUS
    assert config.upsilon_bits == 3
    assert config.time_axis is TimeAxis.EXCLUDE_ERASURE
    assert config.n_cycles == 7
    assert config.run_name == "scan point"
    assert config.plot is True


def test_missing_keys_take_defaults():
    config = parse_config("")
    assert config == RunConfig()
    assert config.L == 7
    assert config.J_q_tau == 0.01
    assert config.U_cross == -0.2
    assert config.disorder_range == [0.0, 3.0]
    assert config.n_trajectories == 10


def test_derived_schedule():
    config = RunConfig()
    assert config.estimated_t1() == pytest.approx(6131.4)
    assert config.resolved_horizon() == pytest.approx(30657.0)
    schedule = config.to_schedule()
    assert schedule.n_cycles == 12263
    assert schedule.record_stride == 3
    assert schedule.cycle_time == 2.5

    slow = RunConfig(J_q_tau=0.002)
    assert slow.estimated_t1() == pytest.approx(153285.0)

    explicit = RunConfig(n_cycles=100, record_stride=10, horizon=5.0)
    assert explicit.to_schedule().n_cycles == 100
    assert RunConfig(horizon=50.0).to_schedule().n_cycles == 20


def test_model_params_fill_zero_site_energies():
    params = RunConfig(L=4, U_upsilon_site=[1, 2, 3, 4]).to_model_params()
    assert params.U_tau_site == [0.0] * 4
    assert params.U_upsilon_site == [1.0, 2.0, 3.0, 4.0]
    assert params.chain_length == 4


def test_unknown_key_names_the_key():
    with pytest.raises(ConfigError) as excinfo:
        parse_config("J_q_tua = 0.1")
    assert excinfo.value.key == "J_q_tua"
    assert "J_q_tua" in str(excinfo.value)


@pytest.mark.parametrize(
    "text, key",
    [
        ("U_tau_site = [0, 0]", None),
        ("upsilon_bits = 0b10000000", None),
        ("disorder_range = [3, 0]", "disorder_range"),
        ("n_cycles = 4\nrecord_stride = 5", None),
        ("t_H = 0\nt_random = 0", None),
        ("qubit_state = maybe", "qubit_state"),
        ("J_q_tau = nan", "J_q_tau"),
    ],
)
def test_invalid_values(text, key):
    with pytest.raises(ConfigError) as excinfo:
        parse_config(text)
    if key is not None:
        assert excinfo.value.key == key


def test_syntax_errors_carry_position():
    with pytest.raises(ConfigError) as excinfo:
        parse_entries("L = 5\n  J_q_tau 0.1\n")
    assert (excinfo.value.line, excinfo.value.column) == (2, 3)

    with pytest.raises(ConfigError) as excinfo:
        parse_entries("L = 5\nL = 6\n")
    assert excinfo.value.line == 2
    assert excinfo.value.key == "L"

    with pytest.raises(ConfigError) as excinfo:
        parse_entries("disorder_range = [0, 3")
    assert excinfo.value.line == 1

    with pytest.raises(ConfigError):
        parse_entries("run_name = 'open")
    with pytest.raises(ConfigError):
        parse_entries("2L = 5")


def test_entry_values():
    entries = parse_entries("a = 0x10\nb = -3\nc = 1e-3\nd = []\ne = none\nf = False\ng = results/run1")
    assert entries == {"a": 16, "b": -3, "c": 0.001, "d": [], "e": None, "f": False, "g": "results/run1"}


def test_load_config(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("L = 3\nupsilon_bits = 3\n", encoding="utf-8")
    assert load_config(path).L == 3
    with pytest.raises(OutputError):
        load_config(tmp_path / "missing.cfg")
