import numpy as np
import pytest

from basketclust.model import (
    BasketError,
    BasketMatrix,
    CategoryLabels,
    Clustering,
    build_matrix,
    read_baskets_csv,
    read_categories_csv,
    validate_clustering,
    write_baskets_csv,
    write_categories_csv,
)


def test_build_matrix_basic():
    m = build_matrix([("b1", "p1"), ("b1", "p2"), ("b2", "p1"), ("b2", "p3")])
    assert m.product_ids == ("p1", "p2", "p3")
    np.testing.assert_array_equal(m.incidence, [[1, 1, 0], [1, 0, 1]])
    assert (m.n_baskets, m.n_products) == (2, 3)


def test_single_item_basket_is_unusable():
    with pytest.raises(BasketError, match="no usable baskets"):
        build_matrix([("b1", "p1")])


def test_empty_records():
    with pytest.raises(BasketError, match="no usable baskets"):
        build_matrix([])


def test_duplicates_collapse_to_presence():
    once = build_matrix([("b1", "p1"), ("b1", "p2")])
    twice = build_matrix([("b1", "p1"), ("b1", "p1"), ("b1", "p2")])
    np.testing.assert_array_equal(once.incidence, twice.incidence)


def test_short_baskets_dropped_and_counted():
    recs = [("b1", "p1"), ("b1", "p2"), ("b1", "p3"), ("b2", "p1"), ("b2", "p2"), ("b3", "p4")]
    m = build_matrix(recs, min_items=3)
    assert m.n_baskets == 1
    assert m.dropped_baskets == 2
    # p4 only occurs in a dropped basket
    assert m.product_ids == ("p1", "p2", "p3")
    assert (m.incidence.sum(axis=1) >= 3).all()


def test_min_items_must_be_two_or_more():
    with pytest.raises(BasketError):
        build_matrix([("b1", "p1"), ("b1", "p2")], min_items=1)


def test_build_matrix_invariant_under_record_permutation(rng):
    recs = [(f"b{rng.integers(20)}", f"p{rng.integers(8)}") for _ in range(200)]
    m = build_matrix(recs)
    shuffled = [recs[i] for i in rng.permutation(len(recs))]
    m2 = build_matrix(shuffled)
    # same multiset of baskets over the same products, possibly reordered
    def canon(mat):
        order = np.argsort(mat.product_ids)
        rows = mat.incidence[:, order]
        return sorted(map(tuple, rows)), sorted(mat.product_ids)
    assert canon(m) == canon(m2)


def test_matrix_rejects_non_binary_and_duplicate_ids():
    with pytest.raises(BasketError):
        BasketMatrix.from_array([[2, 1]])
    with pytest.raises(BasketError):
        BasketMatrix.from_array([[1, 1]], product_ids=["a", "a"])
    with pytest.raises(BasketError):
        BasketMatrix.from_array([[1, 0, 0]])


def test_matrix_is_immutable():
    m = BasketMatrix.from_array([[1, 1]])
    with pytest.raises(ValueError):
        m.incidence[0, 0] = 0


@pytest.mark.parametrize("labels", [[1, 2, 3], [1, 1, 1]])
def test_validate_clustering_ok(labels):
    validate_clustering(Clustering(labels, 3))


def test_validate_clustering_names_index():
    with pytest.raises(BasketError, match="index 2"):
        Clustering([1, 4], 3)
    with pytest.raises(BasketError, match="index 1"):
        Clustering([0, 1], 3)


def test_category_labels_must_cover_all_categories():
    with pytest.raises(BasketError, match="category 2"):
        CategoryLabels([1, 3, 3], 3)
    r = CategoryLabels([2, 1, 2])
    assert r.n_categories == 2


def test_pair_table_counts():
    m = BasketMatrix.from_array([[1, 1, 1, 0], [0, 1, 1, 1], [1, 1, 0, 0]])
    first, second, counts, sizes = m.pair_table
    assert list(sizes) == [2, 3]
    table = {(int(i), int(j)): tuple(c) for i, j, c in zip(first, second, counts)}
    assert table[(1, 2)] == (0, 2)
    assert table[(0, 1)] == (1, 1)
    assert (0, 3) not in table


def test_csv_round_trip(tmp_path):
    m = BasketMatrix.from_array([[1, 1, 0], [0, 1, 1]], ["x", "y", "z"])
    r = CategoryLabels([1, 2, 1])
    write_baskets_csv(tmp_path / "b.csv", m)
    write_categories_csv(tmp_path / "c.csv", m.product_ids, r)
    m2 = read_baskets_csv(tmp_path / "b.csv")
    np.testing.assert_array_equal(m2.incidence, m.incidence)
    assert m2.product_ids == m.product_ids
    r2 = read_categories_csv(tmp_path / "c.csv", m2.product_ids)
    np.testing.assert_array_equal(r2.labels, r.labels)


def test_csv_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("basket,product\nb1,p1\n")
    with pytest.raises(BasketError, match="header"):
        read_baskets_csv(bad)
    bad.write_text("basket_id,product_id\nb1,\n")
    with pytest.raises(BasketError, match="non-empty"):
        read_baskets_csv(bad)
    cats = tmp_path / "cats.csv"
    cats.write_text("product_id,category_id\np1,A\n")
    with pytest.raises(BasketError, match="no category"):
        read_categories_csv(cats, ["p1", "p2"])
