"""Store for internal needs and the actions scheduled against them.

Single-writer: the orchestrator is the only mutator. Needs are never deleted,
only marked satisfied, because traces keep referencing them.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Iterable, Optional

from .errors import ActiveExists, EmptyActionList, EmptyText, NotActive, UnknownNeed
from .model import ActionStatus, IdAllocator, Need, NeedStatus, ScheduledAction


class NeedStore:
    def __init__(self, ids: IdAllocator | None = None):
        self.ids = ids or IdAllocator()
        self._needs: dict[str, Need] = {}
        self._actions: list[ScheduledAction] = []

    # -- loading ------------------------------------------------------------

    def preload(self, needs: Iterable[Need]) -> None:
        """Adopt scenario needs with their ids; the allocator continues past them."""
        for need in needs:
            if need.id in self._needs:
                raise UnknownNeed(f"duplicate need id {need.id!r}")
            self._needs[need.id] = need
        self.ids.bump_past(self._needs.keys())
        if sum(1 for n in self._needs.values() if n.status is NeedStatus.ACTIVE) > 1:
            raise ActiveExists("preloaded needs contain more than one active need")

    # -- queries ------------------------------------------------------------

    def get(self, need_id: str) -> Need:
        try:
            return self._needs[need_id]
        except KeyError:
            raise UnknownNeed(f"no need with id {need_id!r}") from None

    def active(self) -> Optional[Need]:
        for need in self._needs.values():
            if need.status is NeedStatus.ACTIVE:
                return need
        return None

    def needs(self) -> tuple[Need, ...]:
        return tuple(self._needs.values())

    def actions(self) -> tuple[ScheduledAction, ...]:
        return tuple(self._actions)

    def actions_for(self, need_id: str) -> tuple[ScheduledAction, ...]:
        return tuple(a for a in self._actions if a.origin_need == need_id)

    # -- mutations ----------------------------------------------------------

    def add_need(self, text: str, priority: int) -> Need:
        if not text.strip():
            raise EmptyText("need text is empty")
        if priority < 0:
            raise ValueError("priority must be >= 0")
        need = Need(id=self.ids.next(), text=text.strip(), priority=priority)
        self._needs[need.id] = need
        return need

    def pop_next(self) -> Optional[Need]:
        """Activate and return the pending need with the smallest priority;
        insertion order breaks ties. None when nothing is pending."""
        if self.active() is not None:
            raise ActiveExists("a need is already active")
        best: Optional[Need] = None
        for need in self._needs.values():  # insertion order
            if need.status is not NeedStatus.PENDING:
                continue
            if best is None or need.priority < best.priority:
                best = need
        if best is None:
            return None
        activated = replace(best, status=NeedStatus.ACTIVE)
        self._needs[best.id] = activated
        return activated

    def schedule_actions(self, need_id: str, texts: list[str]) -> list[ScheduledAction]:
        need = self.get(need_id)
        if need.status is not NeedStatus.ACTIVE:
            raise NotActive(f"need {need_id!r} is {need.status.value}, not active")
        if not texts:
            raise EmptyActionList("no action texts to schedule")
        for t in texts:
            if not t.strip():
                raise EmptyText("action text is empty")
        start = len(self.actions_for(need_id))
        created = []
        for offset, text in enumerate(texts):
            action = ScheduledAction(
                id=self.ids.next(),
                text=text.strip(),
                origin_need=need_id,
                sequence_index=start + offset,
                status=ActionStatus.PLANNED,
            )
            self._actions.append(action)
            created.append(action)
        return created

    def complete(self, need_id: str) -> Need:
        need = self.get(need_id)
        if need.status is not NeedStatus.ACTIVE:
            raise NotActive(f"need {need_id!r} is {need.status.value}, not active")
        satisfied = replace(need, status=NeedStatus.SATISFIED)
        self._needs[need_id] = satisfied
        return satisfied
