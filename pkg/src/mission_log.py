"""
Replay log and mission report.

Each log line is one event: time with three decimals, event kind, agent id
(or '-') and a compact JSON payload with sorted keys, separated by tabs.
"""

import json
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

from .errors import ReplayParseError

EVENT_KINDS = (
    'mission', 'spawn', 'found', 'lost', 'decide', 'claim', 'release',
    'pick_start', 'pick_done', 'deliver', 'abort', 'crash', 'end',
)


@dataclass(frozen=True)
class LogEvent:
    t: float
    kind: str
    agent: Optional[int]
    payload: Dict = field(default_factory=dict)


def format_event(t: float, kind: str, agent: Optional[int], payload: Dict) -> str:
    agent_field = '-' if agent is None else str(agent)
    body = json.dumps(payload, sort_keys=True, separators=(',', ':'))
    return f"{t:.3f}\t{kind}\t{agent_field}\t{body}"


def parse_event(line: str, line_number: int) -> LogEvent:
    parts = line.rstrip('\n').split('\t')
    if len(parts) != 4:
        raise ReplayParseError(line_number, f"expected 4 tab-separated fields, got {len(parts)}")
    t_text, kind, agent_text, body = parts
    try:
        t = float(t_text)
    except ValueError:
        raise ReplayParseError(line_number, f"invalid time {t_text!r}")
    if kind not in EVENT_KINDS:
        raise ReplayParseError(line_number, f"unknown event kind {kind!r}")
    if agent_text == '-':
        agent = None
    else:
        try:
            agent = int(agent_text)
        except ValueError:
            raise ReplayParseError(line_number, f"invalid agent id {agent_text!r}")
    try:
        payload = json.loads(body)
    except json.JSONDecodeError:
        raise ReplayParseError(line_number, "payload is not valid JSON")
    if not isinstance(payload, dict):
        raise ReplayParseError(line_number, "payload must be a JSON object")
    return LogEvent(t, kind, agent, payload)


class MissionLog:
    def __init__(self):
        self.lines: List[str] = []

    def record(self, t: float, event_kind: str, agent: Optional[int] = None, **payload):
        self.lines.append(format_event(t, event_kind, agent, payload))


def read_events(path: str) -> List[LogEvent]:
    with open(path) as f:
        lines = f.readlines()
    return parse_events(lines)


def parse_events(lines: List[str]) -> List[LogEvent]:
    events = []
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        events.append(parse_event(line, number))
    if not events:
        raise ReplayParseError(1, "log is empty")
    if events[0].kind != 'mission':
        raise ReplayParseError(1, "log must start with a mission event")
    if events[-1].kind != 'end':
        raise ReplayParseError(len(lines), "log ends without an end event (truncated?)")
    return events


@dataclass
class MissionReport:
    strategy: str
    seed: int
    t0: float
    score: int = 0
    trace: List[Tuple[float, int]] = field(default_factory=list)
    delivered: List[str] = field(default_factory=list)
    lost: List[str] = field(default_factory=list)
    decisions: int = 0
    log_lines: List[str] = field(default_factory=list, repr=False)

    def score_at(self, t: float) -> int:
        """Score after every delivery up to time t"""
        score = 0
        for time, value in self.trace:
            if time > t:
                break
            score = value
        return score

    def to_json(self) -> str:
        data = asdict(self)
        del data['log_lines']
        return json.dumps(data, sort_keys=True, indent=2)

    def save(self, path: str):
        with open(path, 'w') as f:
            f.write(self.to_json() + "\n")

    def write_log(self, path: str):
        with open(path, 'w') as f:
            f.write("".join(line + "\n" for line in self.log_lines))

    @classmethod
    def from_json(cls, text: str) -> "MissionReport":
        data = json.loads(text)
        data['trace'] = [tuple(point) for point in data['trace']]
        return cls(**data)
