import pytest

from hilbertconformal.config import StudyConfig, load_config
from hilbertconformal.errors import ConfigError


GOOD = """
[data]
dgp = setting1
n = 300
seed = 12

[model]
algorithm = hetero
sigma_x = auto
ridge = 0.01
splits = 0.5, 0.25, 0.25

[study]
alphas = 0.1, 0.5
replicates = 4
workers = 2

[bootstrap]
gamma = 0.8
x = 2.5
"""


class TestLoadConfig:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "study.cfg"
        path.write_text(GOOD)
        cfg = load_config(path)
        assert cfg.dgp == "setting1"
        assert cfg.n == 300
        assert cfg.algorithm == "hetero"
        assert cfg.splits == (0.5, 0.25, 0.25)
        assert cfg.alphas == (0.1, 0.5)
        assert cfg.gamma == 0.8
        assert cfg.x_query == (2.5,)

    def test_unknown_key_is_named(self, tmp_path):
        path = tmp_path / "study.cfg"
        path.write_text("[data]\ndgp = setting1\nbogus = 1\n")
        with pytest.raises(ConfigError, match=r"\[data\] bogus"):
            load_config(path)

    def test_bad_value_is_named(self, tmp_path):
        path = tmp_path / "study.cfg"
        path.write_text("[study]\nreplicates = many\n")
        with pytest.raises(ConfigError, match=r"\[study\] replicates"):
            load_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "nope.cfg")


class TestValidation:
    def test_alpha_range(self):
        with pytest.raises(ConfigError, match="alphas"):
            StudyConfig(alphas=(1.5,)).validate()

    def test_splits_must_sum_to_one(self):
        with pytest.raises(ConfigError, match="splits"):
            StudyConfig(splits=(0.5, 0.4, 0.3)).validate()

    def test_unknown_algorithm(self):
        with pytest.raises(ConfigError, match="algorithm"):
            StudyConfig(algorithm="magic").validate()

    def test_bandwidth_strings(self):
        assert StudyConfig(sigma_x="median").validate().sigma_x == "median"
        with pytest.raises(ConfigError, match="sigma_x"):
            StudyConfig(sigma_x="wide").validate()

    def test_counts_positive(self):
        with pytest.raises(ConfigError):
            StudyConfig(n=0).validate()

    def test_workers_cap_from_environment(self, monkeypatch):
        cfg = StudyConfig(workers=8)
        monkeypatch.setenv("HC_THREADS", "2")
        assert cfg.effective_workers() == 2
        monkeypatch.delenv("HC_THREADS")
        assert cfg.effective_workers() == 8
        monkeypatch.setenv("HC_THREADS", "zillion")
        with pytest.raises(ConfigError, match="HC_THREADS"):
            cfg.effective_workers()
