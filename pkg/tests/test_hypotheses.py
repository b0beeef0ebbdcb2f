import io

import numpy as np
import pytest

from betreg.hypotheses import (
    Ball,
    Dataset,
    FiniteSupport,
    HypothesisClass,
    HypothesisError,
    Linear,
    Tabulated,
    class_from_json,
    class_to_json,
    clip,
    evaluate,
    load_dataset,
    predict,
    save_class,
    load_class,
    save_dataset,
    write_dataset,
)


def test_linear_zero_theta_is_half():
    h = Linear(np.zeros(3))
    for x in ([0, 0, 0], [0.3, -0.2, 0.5], [1, 0, 0]):
        assert evaluate(h, x) == 0.5


def test_linear_edge_of_ball():
    assert evaluate(Linear([0.5, 0.0]), [1.0, 0.0]) == 1.0
    assert evaluate(Linear([0.5, 0.0]), [-1.0, 0.0]) == 0.0


def test_tabulated_lookup():
    assert evaluate(Tabulated([0.3]), 0) == 0.3


def test_tabulated_unknown_point():
    with pytest.raises(HypothesisError):
        evaluate(Tabulated([0.3]), 1)


def test_linear_rejects_large_theta():
    with pytest.raises(HypothesisError):
        Linear([0.6, 0.0])


def test_linear_rounding_guard():
    # |theta| slightly above 1/2 by rounding is tolerated and clamped
    theta = np.array([0.5 + 1e-13])
    assert evaluate(Linear(theta), [1.0]) == 1.0


def test_linear_dimension_mismatch():
    with pytest.raises(HypothesisError):
        evaluate(Linear([0.1, 0.1]), [1.0])


@pytest.mark.parametrize(
    "v, expected", [(0.5, 0.25), (-3.0, -0.25), (0.1, 0.1)]
)
def test_clip_examples(v, expected):
    assert clip(v, -0.25, 0.25) == expected


def test_clip_bad_interval():
    with pytest.raises(ValueError):
        clip(0.0, 1.0, 0.0)


def test_tabulated_range_checked():
    with pytest.raises(HypothesisError):
        Tabulated([0.2, 1.5])


def test_predict_uses_index():
    h = Tabulated([0.1, 0.7])
    data = Dataset(np.array([[0.0], [1.0], [1.0]]), np.array([0.0, 1.0, 0.0]), np.array([0, 1, 1]))
    np.testing.assert_array_equal(predict(h, data), [0.1, 0.7, 0.7])


def test_ball_samples_inside():
    pts = Ball(3).sample(np.random.default_rng(0), 2000)
    assert pts.shape == (2000, 3)
    assert np.all(np.linalg.norm(pts, axis=1) <= 1.0 + 1e-12)


def test_support_weights_and_index():
    s = FiniteSupport(np.array([[0.0], [1.0], [2.0]]), [0.25, 0.25, 0.5])
    with pytest.raises(HypothesisError):
        FiniteSupport(np.array([[0.0], [1.0]]), [1, 1])
    assert s.index_of([2.0]) == 2
    with pytest.raises(HypothesisError):
        s.index_of([3.0])


def test_class_json_round_trip(tmp_path):
    s = FiniteSupport(np.array([[0.0], [1.0]]), [0.5, 0.5])
    F = HypothesisClass((Tabulated([0.2, 0.4]), Tabulated([0.3, 0.9])), 1, s)
    G = class_from_json(class_to_json(F))
    assert G.star_index == 1
    np.testing.assert_array_equal(G[1].values, [0.3, 0.9])
    save_class(F, tmp_path / "c.json")
    H = load_class(tmp_path / "c.json")
    assert len(H) == 2


def test_class_json_malformed():
    with pytest.raises(HypothesisError):
        class_from_json({"support": [[0.0]], "weights": [1.0]})
    with pytest.raises(HypothesisError):
        class_from_json({"support": [[0.0]], "weights": [1.0], "hypotheses": [[0.1, 0.2]]})


def test_dataset_csv_round_trip(tmp_path):
    s = FiniteSupport(np.array([[0.0], [1.0]]), [0.5, 0.5])
    data = s.resolve(Dataset(np.array([[1.0], [0.0], [1.0]]), np.array([0.25, 1.0, 0.1 + 0.2])))
    save_dataset(data, tmp_path / "d.csv")
    back = load_dataset(tmp_path / "d.csv", support=s)
    np.testing.assert_array_equal(back.y, data.y)
    np.testing.assert_array_equal(back.index, [1, 0, 1])
    buf = io.StringIO()
    write_dataset(data, buf)
    assert buf.getvalue().splitlines()[0] == "x1,y"


@pytest.mark.parametrize("body", ["", "a,b\n1,2\n", "x1,y\n0.0,zz\n", "x1,y\n"])
def test_dataset_csv_malformed(tmp_path, body):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    with pytest.raises(HypothesisError):
        load_dataset(p)


def test_dataset_labels_checked():
    with pytest.raises(HypothesisError):
        Dataset(np.zeros((2, 1)), np.array([0.5, 1.2]))
