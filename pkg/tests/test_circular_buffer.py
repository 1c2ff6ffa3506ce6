"""
Tests for the ring buffer and the state history built on it.
"""
import pytest

from core.errors import InsufficientDataError
from core.models.circular_buffer import CircularBuffer, StateHistory
from core.models.states import DAState


class TestCircularBuffer:
    @pytest.mark.parametrize("capacity", [3, 4])
    def test_overwrites_oldest(self, capacity):
        buffer = CircularBuffer[int](capacity)
        for value in range(10):
            buffer.append(value)
        assert buffer.is_full()
        assert buffer.get_all() == list(range(10 - capacity, 10))

    def test_negative_index(self):
        buffer = CircularBuffer[int](3)
        for value in (1, 2):
            buffer.append(value)
        assert buffer.get(-1) == 2
        assert buffer.get(0) == 1
        with pytest.raises(IndexError):
            buffer.get(2)

    def test_latest_and_range(self):
        buffer = CircularBuffer[int](5)
        for value in range(7):
            buffer.append(value)
        assert buffer.latest(2) == [5, 6]
        assert buffer.get_range(1, 3) == [3, 4]
        with pytest.raises(IndexError):
            buffer.latest(6)

    def test_clear(self):
        buffer = CircularBuffer[int](2)
        buffer.append(1)
        buffer.clear()
        assert len(buffer) == 0
        assert list(buffer) == []

    def test_rejects_empty_capacity(self):
        with pytest.raises(ValueError):
            CircularBuffer[int](0)


class TestStateHistory:
    def _states(self, grid, times):
        base = DAState.equilibrium(grid)
        return [base.with_time(t) for t in times]

    def test_window(self, grid):
        history = StateHistory(3)
        for state in self._states(grid, [0.0, 0.1, 0.2, 0.3]):
            history.push(state)
        assert [s.t for s in history.window()] == [0.1, 0.2, 0.3]

    def test_window_needs_enough_states(self, grid):
        history = StateHistory(3)
        history.push(DAState.equilibrium(grid))
        with pytest.raises(InsufficientDataError):
            history.window()

    def test_push_requires_newer_state(self, grid):
        history = StateHistory()
        first, second = self._states(grid, [0.2, 0.1])
        history.push(first)
        with pytest.raises(ValueError):
            history.push(second)

    def test_uniform_spacing(self, grid):
        history = StateHistory(3)
        for state in self._states(grid, [0.0, 0.1, 0.3]):
            history.push(state)
        assert not history.is_uniform()
        history.clear()
        for state in self._states(grid, [0.0, 0.1, 0.2]):
            history.push(state)
        assert history.is_uniform()
