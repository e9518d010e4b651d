import pytest

import privfit as pf
from privfit.errors import ValidationError


class TestFrequencyTable:
    def test_basic(self):
        t = pf.FrequencyTable((3, 7))
        assert t.n == 10 and t.k == 2

    @pytest.mark.parametrize("counts", [(5,), (-1, 3), (0, 0)])
    def test_invalid(self, counts):
        with pytest.raises(ValidationError):
            pf.FrequencyTable(counts)


class TestPerturbedTable:
    def test_negative_cells_allowed(self):
        b = pf.PerturbedTable((-2, 5, 7), 10)
        assert b.k == 3

    def test_sum_must_match(self):
        with pytest.raises(ValidationError):
            pf.PerturbedTable((1, 2), 4)

    def test_from_free_cells(self):
        b = pf.PerturbedTable.from_free_cells((4, -1), 10)
        assert b.values == (4, -1, 7)


class TestPostProcessedTable:
    def test_total_may_differ(self):
        bp = pf.PostProcessedTable((0, 104, 0))
        assert bp.n_plus == 104

    def test_negative_rejected(self):
        with pytest.raises(ValidationError):
            pf.PostProcessedTable((-1, 5))


class TestCsvIO:
    def test_counts_round_trip(self, tmp_path):
        path = tmp_path / "a.csv"
        table = pf.FrequencyTable((5, 0, 12))
        pf.write_counts_csv(path, table)
        assert path.read_text() == "cell,count\n1,5\n2,0\n3,12\n"
        assert pf.read_counts_csv(path) == table

    def test_values_round_trip(self, tmp_path):
        path = tmp_path / "b.csv"
        b = pf.PerturbedTable((-2, 5, 7), 10)
        pf.write_values_csv(path, b)
        assert path.read_text() == "cell,value\n1,-2\n2,5\n3,7\n"
        assert pf.read_values_csv(path) == b

    def test_missing_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("foo,bar\n1,2\n")
        with pytest.raises(ValidationError, match="count"):
            pf.read_counts_csv(path)

    def test_non_integer_reports_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("cell,count\n1,5\n2,x\n")
        with pytest.raises(ValidationError, match=":3"):
            pf.read_counts_csv(path)

    def test_empty_body(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("cell,count\n")
        with pytest.raises(ValidationError, match="no data"):
            pf.read_counts_csv(path)
