import pytest

from fgsent.config import TrainConfig


def test_defaults():
    c = TrainConfig()
    assert c.epochs == 50
    assert c.batch_size == 32
    assert c.warmup == 0.1
    assert c.max_len == 128
    assert c.dropout == 0.3
    assert c.l2 == 0.01


@pytest.mark.parametrize("field,value", [
    ("epochs", 0),
    ("warmup", 1.0),
    ("warmup", -0.1),
    ("batch_size", 0),
    ("max_len", 1),
    ("dropout", 1.0),
    ("learning_rate", 0.0),
    ("l2", -0.01),
])
def test_bounds(field, value):
    with pytest.raises(ValueError):
        TrainConfig(**{field: value})


def test_dict_round_trip():
    c = TrainConfig(epochs=7, seed=3)
    assert TrainConfig.from_dict(c.to_dict()) == c


def test_from_dict_rejects_unknown_keys():
    with pytest.raises(ValueError, match="momentum"):
        TrainConfig.from_dict({"epochs": 5, "momentum": 0.9})


def test_replace_returns_new_config():
    c = TrainConfig()
    c2 = c.replace(epochs=5)
    assert c2.epochs == 5 and c.epochs == 50
    assert c2.batch_size == c.batch_size
