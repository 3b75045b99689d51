"""
Tests for cli_config module
"""

import pytest

from src.cli_config import (
    CliConfig, filter_from_text, format_complex, parse_complex, parse_complex_list, read_config_file,
)
from src.quadrature import Strategy
from src.utils.errors import ParameterError


class TestParseComplex:
    """Test the a+bi notation"""

    @pytest.mark.parametrize('text,expected', [
        ('0.5+0i', 0.5 + 0j),
        ('1-2j', 1 - 2j),
        ('2.5', 2.5 + 0j),
        ('-0.25', -0.25 + 0j),
        ('0.3i', 0.3j),
        ('-i', -1j),
        ('i', 1j),
        ('1e-3+2e2i', 0.001 + 200j),
        (' 1 + 0.5i ', 1 + 0.5j),
    ])
    def test_forms(self, text, expected):
        """Test accepted spellings"""
        assert parse_complex(text) == pytest.approx(expected)

    @pytest.mark.parametrize('text', ['', 'abc', '1+', '1+2', '1++2i', '0.5+0k'])
    def test_rejects(self, text):
        """Test malformed numbers"""
        with pytest.raises(ParameterError):
            parse_complex(text)

    def test_numbers_pass_through(self):
        """Test numeric input"""
        assert parse_complex(3) == 3 + 0j

    def test_list(self):
        """Test comma-separated lists"""
        assert parse_complex_list('0.1, 0.2-0.1i,') == [0.1 + 0j, 0.2 - 0.1j]

    def test_format(self):
        """Test formatting parses back"""
        assert format_complex(0.5 - 0.25j) == '0.5-0.25i'
        assert parse_complex(format_complex(1.25 + 3j)) == 1.25 + 3j


class TestReadConfigFile:
    """Test key=value files"""

    def test_reads_values(self, temp_dir):
        """Test comments and blank lines are skipped"""
        path = temp_dir / 'run.cfg'
        path.write_text("# periods\nomega1 = 1\n\nomega2=1.41421356  # sqrt 2\ng = 0.5+0.1i\n")

        assert read_config_file(path) == {'omega1': '1', 'omega2': '1.41421356', 'g': '0.5+0.1i'}

    def test_duplicate_key(self, temp_dir):
        """Test a repeated key is an error"""
        path = temp_dir / 'run.cfg'
        path.write_text("g = 0.5\ng = 0.6\n")

        with pytest.raises(ParameterError, match="duplicate"):
            read_config_file(path)

    def test_malformed_line(self, temp_dir):
        """Test lines without '='"""
        path = temp_dir / 'run.cfg'
        path.write_text("omega1 1\n")

        with pytest.raises(ParameterError, match=":1:"):
            read_config_file(path)


class TestCliConfig:
    """Test merging and validation"""

    def test_flags_override_file(self):
        """Test precedence of flags over file values"""
        config = CliConfig.merged('eval', {'g': '0.5', 'omega1': '1.2'}, {'g': '0.7', 'omega2': None})

        assert config.g == '0.7'
        assert config.omega1 == '1.2'
        assert config.omega2 == '1.41421356'

    def test_quadrature_settings(self):
        """Test quadrature keys build the integrator settings"""
        config = CliConfig.merged('eval', {'rel_tol': '1e-8', 'multi_dim_strategy': 'tensor_fixed'}, {'seed': 4})
        spec = config.quadrature_spec()

        assert spec.rel_tol == 1e-8
        assert spec.multi_dim_strategy is Strategy.TENSOR_FIXED
        assert spec.seed == 4

    def test_check_filter(self):
        """Test comma-separated check filters from files"""
        config = CliConfig.merged('verify', {'check_filter': 's2, duality'})
        assert config.check_filter == ['s2', 'duality']

    def test_unknown_setting(self):
        """Test unknown keys are refused"""
        with pytest.raises(ParameterError, match="unknown setting"):
            CliConfig.merged('eval', {'colour': 'red'})

    def test_validation_collects_errors(self):
        """Test several problems are reported together"""
        with pytest.raises(ParameterError) as exc_info:
            CliConfig(command='plot', output_format='xml')

        assert 'command' in str(exc_info.value)
        assert 'output_format' in str(exc_info.value)

    def test_model_params(self):
        """Test parameters from complex strings"""
        params = CliConfig(omega1='1+0.2i', omega2='1.3-0.1i', g='0.5+0.05i').model_params()

        assert params.omega1 == 1 + 0.2j
        assert params.g == 0.5 + 0.05j

    def test_invalid_coupling(self):
        """Test parameter invariants surface as ParameterError"""
        with pytest.raises(ParameterError):
            CliConfig(g='5').model_params()


class TestFilterFromText:
    """Test --filter flattening"""

    def test_flatten(self):
        """Test repeated and comma-separated values"""
        assert filter_from_text(['s2,duality', 'macdonald']) == ['s2', 'duality', 'macdonald']

    def test_empty(self):
        """Test no values means no filter"""
        assert filter_from_text([]) is None
