from __future__ import annotations

from dataclasses import dataclass, fields, replace
from enum import Enum

from ..lpc import MAX_ORDER
from ..manifest import Gender


class Method(str, Enum):
    PITCH = "pitch"
    MCADAMS = "mcadams"
    EXTERNAL = "external"


class GenderPolicy(str, Enum):
    RAISE_MALE_LOWER_FEMALE = "raise_male_lower_female"
    FIXED_DIRECTION = "fixed_direction"


DEFAULT_TIMEOUT = 300.0


@dataclass(frozen=True)
class AnonymizerConfig:
    method: Method
    semitone_step: float = 4.0
    lpc_order: int = 20
    mcadams_alpha: float = 0.8
    backend_command: str | None = None
    gender_policy: GenderPolicy = GenderPolicy.RAISE_MALE_LOWER_FEMALE
    timeout: float = DEFAULT_TIMEOUT
    name: str | None = None

    def __post_init__(self):
        try:
            object.__setattr__(self, "method", Method(self.method))
        except ValueError:
            raise ValueError(
                f"unknown anonymisation method {self.method!r}; "
                f"expected one of {[m.value for m in Method]}"
            ) from None
        try:
            object.__setattr__(self, "gender_policy", GenderPolicy(self.gender_policy))
        except ValueError:
            raise ValueError(f"unknown gender policy {self.gender_policy!r}") from None
        if not self.semitone_step >= 0:
            raise ValueError("semitone_step must be non-negative")
        if int(self.lpc_order) != self.lpc_order or not 1 <= self.lpc_order <= MAX_ORDER:
            raise ValueError(f"lpc_order must be an integer in [1, {MAX_ORDER}]")
        object.__setattr__(self, "lpc_order", int(self.lpc_order))
        if not 0 < self.mcadams_alpha <= 1:
            raise ValueError("mcadams_alpha must lie in (0, 1]")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.method is Method.EXTERNAL:
            cmd = self.backend_command or ""
            if "{input}" not in cmd or "{output}" not in cmd:
                raise ValueError("backend_command must contain {input} and {output} placeholders")

    @property
    def label(self) -> str:
        """Row name in reports, e.g. ``Pitch_step4`` or ``McAdams_lpc20``."""
        if self.name:
            return self.name
        if self.method is Method.PITCH:
            return f"Pitch_step{self.semitone_step:g}"
        if self.method is Method.MCADAMS:
            suffix = "" if self.mcadams_alpha == 0.8 else f"_a{self.mcadams_alpha:g}"
            return f"McAdams_lpc{self.lpc_order}{suffix}"
        return "External"

    @classmethod
    def from_dict(cls, d: dict) -> AnonymizerConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config field(s): {', '.join(sorted(unknown))}")
        if "method" not in d:
            raise ValueError("config lacks 'method'")
        return cls(**d)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = v.value if isinstance(v, Enum) else v
        return out

    def evolve(self, **changes) -> AnonymizerConfig:
        return replace(self, **changes)


def apply_gender_policy(gender: Gender, step: float, policy: GenderPolicy) -> float:
    """Signed semitone shift for one speaker.

    Under the gendered policy male voices go up by ``step`` and female voices
    down by the same amount; the fixed policy always shifts up.
    """
    policy = GenderPolicy(policy)
    gender = Gender(gender)
    if policy is GenderPolicy.FIXED_DIRECTION:
        return float(step)
    if gender is Gender.MALE:
        return float(step)
    if gender is Gender.FEMALE:
        return -float(step)
    raise ValueError("gender is unspecified but the gender policy needs it; use fixed_direction")
