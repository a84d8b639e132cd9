import numpy as np
import pytest

from opinion_kinetics import io
from opinion_kinetics.core import DomainError, SampleSet


class TestSampleRoundTrip:
    def test_values_survive_exactly(self, tmp_path):
        vals = np.array([0.1, -0.9999999999999999, 1 / 3, 0.0])
        path = tmp_path / "s.csv"
        io.write_samples_csv(path, SampleSet(vals), {"seed": 1})
        back = io.read_samples_csv(path)
        np.testing.assert_array_equal(back.values, vals)

    def test_meta_block_present(self, tmp_path):
        path = tmp_path / "s.csv"
        io.write_samples_csv(path, SampleSet(np.array([0.5])), {"command": "t", "seed": 9})
        lines = path.read_text().splitlines()
        assert lines[0] == io.BANNER
        assert '"seed": 9' in lines[1]
        assert lines[2] == "x"

    def test_wrong_schema_rejected(self, tmp_path):
        path = tmp_path / "d.csv"
        io.write_density_csv(path, np.array([0.0, 1.0]), np.array([1.0, 0.0]), {})
        with pytest.raises(DomainError):
            io.read_samples_csv(path)


class TestDensityRoundTrip:
    def test_columns_survive(self, tmp_path):
        x = np.linspace(-1, 1, 5)
        rho = np.array([0.0, 0.5, 1.0, 0.5, 0.0])
        path = tmp_path / "d.csv"
        io.write_density_csv(path, x, rho, {})
        xb, rb = io.read_density_csv(path)
        np.testing.assert_array_equal(xb, x)
        np.testing.assert_array_equal(rb, rho)

    def test_read_table_dispatch(self, tmp_path):
        s = tmp_path / "s.csv"
        d = tmp_path / "d.csv"
        io.write_samples_csv(s, SampleSet(np.array([0.25])), {})
        io.write_density_csv(d, np.array([-1.0, 1.0]), np.array([0.5, 0.5]), {})
        assert isinstance(io.read_table(s), SampleSet)
        assert isinstance(io.read_table(d), tuple)

    def test_unknown_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(DomainError):
            io.read_table(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("# only comments\n")
        with pytest.raises(DomainError):
            io.read_table(path)
