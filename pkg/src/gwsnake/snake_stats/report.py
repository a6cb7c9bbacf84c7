import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional


@dataclass
class StatReport:
    name: str
    value: float
    stderr: float = math.nan
    n_samples: int = 1
    seed: Optional[int] = None
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("value", "stderr"):
            if isinstance(d[k], float) and not math.isfinite(d[k]):
                d[k] = None
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "StatReport":
        d = dict(d)
        for k in ("value", "stderr"):
            if d.get(k) is None:
                d[k] = math.nan
        return cls(**d)
