import numpy as np
import pytest

from app.errors import ErrorCode, WorkbenchError
from app.services.families import count_statistic, parity_statistic
from app.services.model_core import Alphabet, make_joint
from app.services.statistics_service import (
    attach,
    canonicalize,
    enumerate_partitions,
    from_labels,
    identity,
    is_coarsening,
    product,
    push_forward,
    restricted_growth_strings,
)

X = Alphabet("X", ("00", "01", "10", "11"))
Y = Alphabet("Y", ("a", "b"))


class TestCanonicalForm:
    def test_labels_numbered_by_first_occurrence(self):
        t = from_labels(X, ["z", "y", "y", "x"])
        assert t.labels == (0, 1, 1, 2)
        assert t.num_classes == 3

    def test_count_partition_label(self):
        assert count_statistic(X).partition_label() == "00|01,10|11"

    def test_canonicalize_missing_symbol(self):
        with pytest.raises(WorkbenchError) as e:
            canonicalize(X, {"00": 0, "01": 1, "10": 1})
        assert e.value.code is ErrorCode.MISSING_SYMBOL

    def test_canonicalize_foreign_symbol(self):
        with pytest.raises(WorkbenchError) as e:
            canonicalize(Y, {"a": 0, "b": 0, "c": 1})
        assert e.value.code is ErrorCode.DOMAIN_MISMATCH

    def test_same_partition_different_names_are_equal(self):
        assert canonicalize(Y, {"a": "left", "b": "right"}) == canonicalize(Y, {"a": 7, "b": 3})


class TestRelations:
    def test_coarsening(self):
        assert is_coarsening(count_statistic(X), identity(X))
        assert is_coarsening(parity_statistic(X), count_statistic(X))
        assert not is_coarsening(count_statistic(X), parity_statistic(X))

    def test_coarsening_on_different_domains(self):
        with pytest.raises(WorkbenchError) as e:
            is_coarsening(identity(X), identity(Y))
        assert e.value.code is ErrorCode.DOMAIN_MISMATCH

    def test_product_same_domain(self):
        with pytest.raises(WorkbenchError) as e:
            product(identity(X), identity(X))
        assert e.value.code is ErrorCode.SAME_DOMAIN

    def test_product_classes_are_pairs(self):
        pair = product(parity_statistic(X), identity(Y))
        assert pair.domain.name == "X:Y"
        assert pair.num_classes == 4


class TestDistributions:
    def test_push_forward_sums_classes(self):
        d = make_joint([X], [0.1, 0.2, 0.3, 0.4])
        reduced = push_forward(d, "X", count_statistic(X))
        np.testing.assert_allclose(reduced.probs, [0.1, 0.5, 0.4])
        assert reduced.axis("X").symbols == ("00", "01,10", "11")

    def test_attach_adds_deterministic_axis(self):
        d = attach(make_joint([X], [0.1, 0.2, 0.3, 0.4]), "X", parity_statistic(X))
        assert d.names == ("X", "T(X)")
        np.testing.assert_allclose(d.tensor("T(X)"), [0.5, 0.5])


class TestEnumeration:
    @pytest.mark.parametrize("n, bell", [(1, 1), (2, 2), (3, 5), (4, 15), (5, 52)])
    def test_bell_numbers(self, n, bell):
        assert len(list(restricted_growth_strings(n))) == bell

    def test_max_blocks(self):
        # разбиения 4 элементов не более чем на 2 блока: 1 + 7
        assert len(list(enumerate_partitions(X, 2))) == 8

    def test_partitions_are_distinct(self):
        labels = {t.labels for t in enumerate_partitions(X)}
        assert len(labels) == 15
