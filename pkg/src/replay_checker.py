"""
Replay of mission logs: rebuild the score trace and check the mission
invariants event by event.
"""

from dataclasses import dataclass, field
from typing import Dict, List

from .mission_log import LogEvent, MissionReport, parse_events, read_events

IN_FIELD, CARRIED, DELIVERED, LOST = 'in_field', 'carried', 'delivered', 'lost'


@dataclass
class ReplayResult:
    report: MissionReport
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_events(events: List[LogEvent]) -> ReplayResult:
    header = events[0].payload
    t0 = float(header.get('t0', 0.0))
    report = MissionReport(strategy=header.get('strategy', ''), seed=int(header.get('seed', 0)), t0=t0)
    violations = []

    status: Dict[str, str] = {}
    found = set()
    holder: Dict[str, int] = {}
    picked_by: Dict[str, int] = {}
    done_by: Dict[str, int] = {}
    crashed_at: Dict[int, float] = {}
    last_t = float('-inf')

    for event in events:
        where = f"t={event.t:.3f} {event.kind}"
        p = event.payload
        if event.t < last_t:
            violations.append(f"{where}: time goes backwards")
        last_t = max(last_t, event.t)
        if event.agent in crashed_at and not (event.kind == 'release' and event.t == crashed_at[event.agent]):
            violations.append(f"{where}: agent {event.agent} acts after crashing")

        if event.kind == 'spawn':
            status[p['object']] = IN_FIELD
        elif event.kind == 'found':
            found.add(p['task'])
        elif event.kind == 'decide':
            report.decisions += 1
        elif event.kind == 'claim':
            task = p['task']
            if task in holder and holder[task] != event.agent:
                violations.append(f"{where}: task {task} claimed by agent {event.agent} "
                                  f"while agent {holder[task]} holds it")
            holder[task] = event.agent
        elif event.kind == 'release':
            task = p['task']
            if holder.get(task) == event.agent:
                del holder[task]
            else:
                violations.append(f"{where}: agent {event.agent} released {task} without holding it")
        elif event.kind == 'pick_start':
            obj = p['object']
            if obj not in found:
                violations.append(f"{where}: {obj} picked without being detected")
            if status.get(obj) != IN_FIELD:
                violations.append(f"{where}: {obj} is not in the field")
            status[obj] = CARRIED
            picked_by[obj] = event.agent
        elif event.kind == 'pick_done':
            obj = p['object']
            if picked_by.get(obj) != event.agent:
                violations.append(f"{where}: {obj} finished by an agent that did not start the pick")
            done_by[obj] = event.agent
        elif event.kind == 'deliver':
            obj = p['object']
            if obj not in found:
                violations.append(f"{where}: {obj} delivered without being detected")
            if done_by.get(obj) != event.agent:
                violations.append(f"{where}: {obj} delivered by agent {event.agent} without a pick_done")
            if status.get(obj) != CARRIED:
                violations.append(f"{where}: {obj} delivered while not carried")
            if event.t > t0:
                violations.append(f"{where}: delivery after t0={t0}")
            status[obj] = DELIVERED
            report.score += int(p['points'])
            report.delivered.append(obj)
            report.trace.append((event.t, report.score))
            if p.get('score') != report.score:
                violations.append(f"{where}: logged score {p.get('score')} differs from replayed {report.score}")
        elif event.kind == 'lost' and p.get('reason') == 'crash':
            obj = p['object']
            if status.get(obj) != CARRIED:
                violations.append(f"{where}: {obj} lost in a crash while not carried")
            status[obj] = LOST
            report.lost.append(obj)
        elif event.kind == 'crash':
            crashed_at[event.agent] = event.t
        elif event.kind == 'end':
            if p.get('score') != report.score:
                violations.append(f"{where}: final score {p.get('score')} differs from replayed {report.score}")

    expected = int(header.get('objects', len(status)))
    if len(status) != expected:
        violations.append(f"conservation: {len(status)} objects spawned, {expected} announced")

    for previous, current in zip(report.trace, report.trace[1:]):
        if current[1] < previous[1]:
            violations.append(f"score decreased at t={current[0]:.3f}")

    return ReplayResult(report, violations)


def replay(log_path: str) -> ReplayResult:
    """Parse a log file and check it; parse errors raise ReplayParseError"""
    return check_events(read_events(log_path))


def replay_lines(lines: List[str]) -> ReplayResult:
    return check_events(parse_events(lines))
