import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from grl_probe.embedding import DivergenceError, EmbeddingMatrix
from grl_probe.generators import generate_ba, path_graph, two_cliques
from grl_probe.skipgram import (SkipGramConfig, alias_table, deepwalk, init_vectors, negative_sampling_table,
                                node2vec, pair_grad, pair_loss, subsample_corpus, train_skipgram)
from grl_probe.walks import WalkCorpus, WalkParams, biased_walks, uniform_walks

CLIQUES = two_cliques(8)
LABELS = np.repeat([0, 1], 8)


def _cos(v):
    n = v / np.linalg.norm(v, axis=1, keepdims=True)
    return n @ n.T


def _intra_inter(m):
    same = LABELS[:, None] == LABELS[None, :]
    np.fill_diagonal(same, False)
    return m[same].mean(), m[LABELS[:, None] != LABELS[None, :]].mean()


def test_config_validation():
    for bad in ({"dim": 0}, {"window": 0}, {"negatives": 0}, {"learning_rate": 0}, {"epochs": 0}):
        with pytest.raises(ValueError):
            SkipGramConfig(**bad)


def test_noise_table_examples():
    g = path_graph(3)
    assert negative_sampling_table(two_cliques(3), 0.0) == pytest.approx([1 / 6] * 6)
    assert negative_sampling_table(g, 1.0) == pytest.approx([0.25, 0.5, 0.25])
    w = np.array([1.0, 2.0 ** -0.75, 1.0])
    assert negative_sampling_table(g, -0.75) == pytest.approx(w / w.sum(), abs=1e-12)
    assert negative_sampling_table(g, -0.75)[1] == pytest.approx(0.2292, abs=1e-4)


def test_alias_table_distribution():
    probs = np.array([0.5, 0.3, 0.15, 0.05])
    prob, alias = alias_table(probs)
    # exact mass per outcome implied by the table
    n = len(probs)
    mass = prob / n
    np.add.at(mass, alias, (1 - prob) / n)
    assert mass == pytest.approx(probs, abs=1e-12)


def test_init_vectors():
    w, c = init_vectors(10, 8, 0)
    assert np.abs(w).max() <= 0.5 / 8 and not c.any()


def test_pair_gradient_finite_differences():
    rng = np.random.default_rng(0)
    z, cp, cn = rng.normal(size=6), rng.normal(size=6), rng.normal(size=(5, 6))
    dz, dcp, dcn = pair_grad(z, cp, cn)
    h = 1e-6
    for arr, grad in ((z, dz), (cp, dcp), (cn, dcn)):
        flat, gflat = arr.reshape(-1), grad.reshape(-1)
        for i in range(len(flat)):
            old = flat[i]
            flat[i] = old + h
            up = pair_loss(z, cp, cn)
            flat[i] = old - h
            dn = pair_loss(z, cp, cn)
            flat[i] = old
            num = (up - dn) / (2 * h)
            assert abs(num - gflat[i]) <= 1e-5 * max(1.0, abs(num))


def test_subsample_keeps_rare_corpus():
    c = uniform_walks(generate_ba(200, 2, 0), WalkParams(1, 10, seed=0))
    freq = np.bincount(c.walks) / c.num_tokens
    same = subsample_corpus(c, float(freq.max()) + 1e-9, seed=1)
    assert same.to_lists() == c.to_lists()


def test_subsample_single_node_keep_rate():
    c = WalkCorpus.from_lists([[0] * 100000], WalkParams())
    kept = subsample_corpus(c, 0.01, seed=0).num_tokens
    assert abs(kept / 100000 - 0.1) < 0.005


def test_subsample_count_matches_expectation():
    c = uniform_walks(generate_ba(300, 3, 1), WalkParams(2, 20, seed=0))
    freq = np.bincount(c.walks) / c.num_tokens
    keep = np.minimum(1, np.sqrt(1e-3 / freq))[c.walks]
    mu, sd = keep.sum(), np.sqrt((keep * (1 - keep)).sum())
    counts = [subsample_corpus(c, 1e-3, s).num_tokens for s in range(20)]
    assert all(abs(k - mu) < 3 * sd + 1 for k in counts)


def test_subsample_never_bridges_gaps():
    c = WalkCorpus.from_lists([[0, 1, 0, 2, 0, 3]], WalkParams())
    out = subsample_corpus(c, 1e-9, seed=0)  # node 0 is frequent, almost always dropped
    for w in out:
        assert 0 not in w.tolist() or len(w) == 1


def test_homophily_cosine():
    emb = deepwalk(CLIQUES, WalkParams(10, 40, seed=0), SkipGramConfig(dim=16, window=5, epochs=5, seed=0))
    intra, inter = _intra_inter(_cos(emb.vectors))
    assert intra > inter


def test_deterministic_single_thread():
    cfg = SkipGramConfig(dim=8, window=3, epochs=2, seed=3)
    a = deepwalk(CLIQUES, WalkParams(2, 10, seed=1), cfg)
    b = deepwalk(CLIQUES, WalkParams(2, 10, seed=1), cfg)
    assert np.array_equal(a.vectors, b.vectors)
    assert a.metadata["concurrency"] == "serial"


def test_hogwild_mode_runs():
    cfg = SkipGramConfig(dim=8, window=3, epochs=2, seed=3, workers=2)
    e = deepwalk(CLIQUES, WalkParams(5, 20, seed=1), cfg)
    assert e.metadata["concurrency"] == "hogwild" and np.isfinite(e.vectors).all()


def test_loss_decreases_within_epoch():
    wins = 0
    for s in range(20):
        c = uniform_walks(CLIQUES, WalkParams(10, 40, seed=s))
        e = train_skipgram(c, SkipGramConfig(dim=16, window=5, epochs=1, seed=s, loss_chunk=100),
                           16, negative_sampling_table(CLIQUES, 0.75))
        t = e.loss_trace
        k = max(1, len(t) // 5)
        wins += t[-k:].mean() < t[:k].mean()
    assert wins >= 19


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 1000), st.sampled_from([-0.75, 0.0, 0.75]))
def test_norms_bounded(seed, ns):
    e = deepwalk(CLIQUES, WalkParams(3, 20, seed=seed),
                 SkipGramConfig(dim=8, window=4, epochs=2, ns_exponent=ns, seed=seed))
    assert np.linalg.norm(e.vectors, axis=1).max() < 100


def test_node2vec_pq1_is_deepwalk():
    cfg = SkipGramConfig(dim=8, window=3, seed=2)
    wp = WalkParams(3, 15, 1.0, 1.0, seed=5)
    assert np.array_equal(deepwalk(CLIQUES, wp, cfg).vectors, node2vec(CLIQUES, wp, cfg).vectors)
    assert np.array_equal(uniform_walks(CLIQUES, wp).walks, biased_walks(CLIQUES, wp).walks)


def test_divergence_reported():
    c = uniform_walks(CLIQUES, WalkParams(5, 20, seed=0))
    with pytest.raises(DivergenceError) as info:
        train_skipgram(c, SkipGramConfig(dim=8, learning_rate=1e300, seed=0), 16)
    assert info.value.last_finite_loss is None or np.isfinite(info.value.last_finite_loss)


def test_empty_corpus():
    with pytest.raises(ValueError):
        train_skipgram(WalkCorpus.from_lists([], WalkParams()), SkipGramConfig(), 3)


def test_embedding_file_round_trip(tmp_path):
    e = EmbeddingMatrix(np.arange(6.0).reshape(3, 2) / 7, {"method": "x"})
    e.write(tmp_path / "e.txt", labels=["a", "b", "c"])
    lines = (tmp_path / "e.txt").read_text().splitlines()
    assert lines[0] == "3 2" and lines[1].startswith("a ")
    back = EmbeddingMatrix.read(tmp_path / "e.txt")
    assert np.array_equal(back.vectors, e.vectors) and back.metadata["node_ids"] == ["a", "b", "c"]
    with pytest.raises(DivergenceError):
        EmbeddingMatrix(np.array([[np.nan]]))
