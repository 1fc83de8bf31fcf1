from novikov_cli.core.union_find import (
    TranslationUnionFind, normalize_class, wrapping_class,
)


def test_consistent_translations_record_no_cycle():
    uf = TranslationUnionFind(3)
    uf.union(0, 1, (1, 0))
    uf.union(1, 2, (0, 1))
    uf.union(2, 0, (-1, -1))
    assert uf.cycles == {}
    root, offset = uf.find(2)
    assert root == 0
    assert offset == (1, 1)


def test_self_touching_translation_is_a_cycle():
    uf = TranslationUnionFind(3)
    uf.union(0, 1, (1, 0))
    uf.union(1, 2, (0, 1))
    uf.union(2, 0)
    root, _ = uf.find(0)
    assert uf.cycles[root] == [(1, 1)]
    assert wrapping_class(uf.cycles[root]) == (1, (1, 1))


def test_cycles_follow_merged_roots():
    uf = TranslationUnionFind(4)
    uf.union(0, 0, (1, 0))
    uf.union(2, 3)
    uf.union(3, 3, (0, 2))
    uf.union(0, 2)
    root, _ = uf.find(3)
    rank, _ = wrapping_class(uf.cycles[root])
    assert rank == 2
    assert uf.find(0)[0] == root
    assert uf.find(1) == (1, (0, 0))


def test_normalize_class():
    assert normalize_class((-2, 4)) == (1, -2)
    assert normalize_class((0, -3)) == (0, 1)
    assert normalize_class((0, 0)) == (0, 0)


def test_parallel_cycles_have_rank_one():
    assert wrapping_class([(2, 0), (-1, 0), (0, 0)]) == (1, (1, 0))
    assert wrapping_class([]) == (0, (0, 0))
