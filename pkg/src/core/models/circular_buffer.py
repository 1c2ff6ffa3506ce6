"""
CircularBuffer for the latest simulation states with O(1) access and insertion.
The centered-difference audits only ever need the last few states, so the runner keeps
a short ring instead of the whole trajectory.
"""
from typing import Generic, List, Optional, TypeVar, Union

from core.errors import InsufficientDataError
from core.models.states import DAState, DoiState

T = TypeVar("T")


class CircularBuffer(Generic[T]):
    """
    Fixed-capacity ring buffer.
    - O(1) insertion at the end
    - O(1) random access (0 = oldest)
    - Overwrites the oldest entry when full
    """

    __slots__ = ('capacity', 'buffer', 'write_index', 'count', '_mask')

    def __init__(self, capacity: int):
        """
        Args:
            capacity: Maximum number of entries to keep.
        """
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.buffer: List[Optional[T]] = [None] * capacity
        self.write_index = 0  # Next position to write
        self.count = 0
        # Power-of-2 capacities use a mask instead of modulo
        self._mask = capacity - 1 if (capacity & (capacity - 1)) == 0 else None

    def _physical(self, index: int) -> int:
        raw = self.write_index - self.count + index
        return raw & self._mask if self._mask is not None else raw % self.capacity

    def append(self, item: T) -> None:
        """Add an entry. O(1)."""
        self.buffer[self.write_index] = item
        if self._mask is not None:
            self.write_index = (self.write_index + 1) & self._mask
        else:
            self.write_index = (self.write_index + 1) % self.capacity
        if self.count < self.capacity:
            self.count += 1

    def get(self, index: int) -> T:
        """
        Entry at logical index (0 = oldest, count-1 = newest); negative indices count from
        the newest.
        """
        if index < 0:
            index += self.count
        if index < 0 or index >= self.count:
            raise IndexError(f"Index {index} out of range [0, {self.count})")
        item = self.buffer[self._physical(index)]
        assert item is not None
        return item

    def get_all(self) -> List[T]:
        """All entries in insertion order."""
        return [self.get(i) for i in range(self.count)]

    def get_range(self, start_index: int, end_index: int) -> List[T]:
        """Entries from start_index to end_index (exclusive)."""
        if start_index < 0 or end_index > self.count or start_index > end_index:
            raise IndexError(f"Invalid range [{start_index}, {end_index}) for buffer of size {self.count}")
        return [self.get(i) for i in range(start_index, end_index)]

    def latest(self, n: int) -> List[T]:
        """The newest n entries, oldest first."""
        if n > self.count:
            raise IndexError(f"requested {n} entries, buffer holds {self.count}")
        return self.get_range(self.count - n, self.count)

    def is_full(self) -> bool:
        return self.count == self.capacity

    def size(self) -> int:
        return self.count

    def __len__(self) -> int:
        return self.count

    def __iter__(self):
        return iter(self.get_all())

    def clear(self) -> None:
        self.write_index = 0
        self.count = 0
        self.buffer = [None] * self.capacity


State = Union[DAState, DoiState]


class StateHistory(CircularBuffer[State]):
    """
    Ring of recent states for the centered-difference residuals.

    Consecutive states must be one step apart in time. The runner clears the history at
    the start of every run, so a restarted run never mixes in states from before the restart.
    """

    __slots__ = ()

    def __init__(self, capacity: int = 3):
        super().__init__(capacity)

    def push(self, state: State) -> None:
        if self.count and state.t <= self.get(-1).t:
            raise ValueError(f"state at t={state.t} is not newer than t={self.get(-1).t}")
        self.append(state)

    def window(self, n: int = 3) -> List[State]:
        """
        The last n states, oldest first.

        Raises:
            InsufficientDataError: if fewer than n states are stored.
        """
        if self.count < n:
            raise InsufficientDataError(f"audit needs {n} stored states, have {self.count}")
        return self.latest(n)

    def is_uniform(self, relative_tolerance: float = 1e-9) -> bool:
        """True when the stored states are equally spaced in time."""
        times = [state.t for state in self.get_all()]
        if len(times) < 3:
            return True
        steps = [b - a for a, b in zip(times, times[1:])]
        return max(steps) - min(steps) <= relative_tolerance * max(abs(s) for s in steps)
