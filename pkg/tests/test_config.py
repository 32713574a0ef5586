"""配置文件解析、覆盖优先级与校验。"""

import pytest

from src.config.loader import load_experiment_config, merge_overrides, parse_config_text
from src.config.schemas import InitMode, Method, SolverConfig, build_experiment_config
from src.errors import ConfigurationError


class TestParseConfigText:

    def test_flat_keys_and_lists(self):
        values = parse_config_text(
            "# 注释\nN = 16\nsnr_db = 10, 20  # 行尾注释\nmethods = zf, fpg\n"
        )
        assert values == {"N": "16", "snr_db": ["10", "20"], "methods": ["zf", "fpg"]}

    def test_solver_keys_with_and_without_prefix(self):
        values = parse_config_text("sigma = 0.1\nsolver.max_iters = 50\n")
        assert values == {"solver": {"sigma": "0.1", "max_iters": "50"}}

    def test_stop_window_reaches_solver(self):
        cfg = build_experiment_config(parse_config_text("stop_window = 3\n"))
        assert cfg.solver.stop_window == 3
        assert SolverConfig().stop_window == 10

    def test_unknown_key_names_line(self):
        with pytest.raises(ConfigurationError, match="cfg:2"):
            parse_config_text("N = 4\nantennas = 8\n", source="cfg")

    def test_unknown_solver_key(self):
        with pytest.raises(ConfigurationError):
            parse_config_text("solver.N = 4\n")

    def test_missing_equals(self):
        with pytest.raises(ConfigurationError, match="缺少"):
            parse_config_text("N\n")

    def test_malformed_line_names_line(self):
        with pytest.raises(ConfigurationError, match="cfg:3: 语法错误"):
            parse_config_text("N = 4\n# x\nK 4\n", source="cfg")

    def test_quoted_value_and_hash_inside_value(self):
        values = parse_config_text("methods = \"zf, fpg\"  # 引号内的值\nseed = 3#4\n")
        assert values == {"methods": ["zf", "fpg"], "seed": "3#4"}


class TestLoadExperimentConfig:

    def test_defaults(self):
        cfg = load_experiment_config()
        assert (cfg.N, cfg.K, cfg.T, cfg.L) == (64, 8, 10, 2)
        assert cfg.solver.sigma == 0.05
        assert cfg.solver.tol == 1e-4
        assert cfg.solver.max_iters == 5000
        assert cfg.method_names == ["zf", "ce-zf", "mui-min", "pg", "fpg"]

    def test_missing_file_names_path(self, tmp_path):
        path = tmp_path / "nope.cfg"
        with pytest.raises(ConfigurationError, match="nope.cfg"):
            load_experiment_config(path)

    def test_overrides_take_precedence(self, tmp_path):
        path = tmp_path / "x.cfg"
        path.write_text("N = 16\nK = 4\nsigma = 0.2\n")
        cfg = load_experiment_config(path, {"N": 32, "trials": None, "solver": {"sigma": None, "tol": 1e-3}})
        assert cfg.N == 32
        assert cfg.K == 4
        assert cfg.solver.sigma == 0.2
        assert cfg.solver.tol == 1e-3

    @pytest.mark.parametrize("name", ["qam16_sweep.cfg", "qam64_sweep.cfg", "runtime_bench.cfg"])
    def test_bundled_configs_load(self, configs_dir, name):
        cfg = load_experiment_config(configs_dir / name)
        assert cfg.N >= cfg.K

    def test_qam16_sweep_settings(self, configs_dir):
        cfg = load_experiment_config(configs_dir / "qam16_sweep.cfg")
        assert (cfg.N, cfg.K, cfg.T, cfg.L) == (64, 8, 10, 2)
        assert cfg.snr_db == [20.0, 25.0, 30.0]


class TestValidation:

    def test_invalid_qam_order(self):
        with pytest.raises(ConfigurationError, match="L"):
            build_experiment_config({"L": 3})

    def test_zf_needs_enough_antennas(self):
        with pytest.raises(ConfigurationError, match="N ≥ K"):
            build_experiment_config({"N": 2, "K": 4, "methods": ["zf"]})

    def test_ce_zf_init_needs_enough_antennas(self):
        with pytest.raises(ConfigurationError):
            build_experiment_config({"N": 2, "K": 4, "methods": ["pg"], "solver": {"init": "ce-zf"}})

    def test_iterative_methods_allow_fewer_antennas(self):
        cfg = build_experiment_config({"N": 2, "K": 4, "methods": ["pg", "fpg", "mui-min"]})
        assert cfg.methods == [Method.PG, Method.FPG, Method.MUI_MIN]

    def test_methods_deduplicated_in_order(self):
        cfg = build_experiment_config({"methods": ["fpg", "zf", "fpg"]})
        assert cfg.method_names == ["fpg", "zf"]

    def test_unknown_method(self):
        with pytest.raises(ConfigurationError):
            build_experiment_config({"methods": ["mmse"]})

    def test_unknown_field(self):
        with pytest.raises(ConfigurationError):
            build_experiment_config({"antennas": 4})

    @pytest.mark.parametrize("field,value", [
        ("sigma", 0.0), ("tol", -1.0), ("shrink", 1.0), ("max_iters", 0),
        ("stop_window", 0), ("sufficient_decrease", 0.5),
    ])
    def test_solver_bounds(self, field, value):
        with pytest.raises(ConfigurationError):
            build_experiment_config({"solver": {field: value}})

    def test_solver_config_is_frozen(self):
        cfg = SolverConfig()
        with pytest.raises(Exception):
            cfg.sigma = 0.1
        assert cfg.model_copy(update={"init": InitMode.CE_ZF}).init == InitMode.CE_ZF

    def test_continuation_floor(self):
        assert not SolverConfig().continuation_enabled
        cfg = SolverConfig(sigma_decay=0.5, sigma_min=0.01)
        assert cfg.continuation_enabled
        assert cfg.sigma_floor == 0.01


def test_merge_overrides_rejects_unknown_key():
    with pytest.raises(ConfigurationError):
        merge_overrides({}, {"antennas": 4})
