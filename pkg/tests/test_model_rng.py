import numpy as np
import pytest

from yule_bins.model_layer.rng import MAX_SEED, RngStream, as_generator, run_replications


def test_same_stream_same_draws() -> None:
    """A (master_seed, stream_index) pair always yields the same draws."""

    # Arrange
    first = RngStream(7, 3)
    second = RngStream(7, 3)

    # Act
    a = first.generator().random(5)
    b = second.generator().random(5)

    # Assert
    np.testing.assert_array_equal(a, b)


def test_different_streams_differ() -> None:
    a = RngStream(7, 0).generator().random(5)
    b = RngStream(7, 1).generator().random(5)
    c = RngStream(8, 0).generator().random(5)

    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_child_and_block_indices() -> None:
    base = RngStream.block(11, 2)

    assert base.stream_index == 2 << 32
    assert base.child(5) == RngStream(11, (2 << 32) + 5)
    with pytest.raises(ValueError, match="offset"):
        base.child(-1)


@pytest.mark.parametrize("seed", [-1, MAX_SEED + 1])
def test_seed_out_of_range(seed: int) -> None:
    with pytest.raises(ValueError, match="64-bit"):
        RngStream(seed)


def test_as_generator_accepts_both_forms() -> None:
    gen = np.random.default_rng(0)

    assert as_generator(gen) is gen
    assert isinstance(as_generator(RngStream(1)), np.random.Generator)
    with pytest.raises(TypeError):
        as_generator(42)  # type: ignore[arg-type]


def test_run_replications_is_thread_count_independent() -> None:
    """Replication r sees base.child(r) no matter how many threads run the batch."""

    # Arrange
    base = RngStream(2024, 100)

    def task(stream: RngStream) -> float:
        return float(stream.generator().standard_exponential())

    # Act
    inline = run_replications(task, 32, base, threads=1)
    pooled = run_replications(task, 32, base, threads=4)

    # Assert
    assert inline == pooled
    assert inline[3] == task(base.child(3))


def test_run_replications_rejects_bad_counts() -> None:
    with pytest.raises(ValueError, match="n_replications"):
        run_replications(lambda s: 0, 0, RngStream(1))
    with pytest.raises(ValueError, match="threads"):
        run_replications(lambda s: 0, 1, RngStream(1), threads=0)
