"""Constant-overhead interface schedules and exact qubit accounting.

A schedule lowers h blocks from level r to level r' one level per stage;
within a stage, macro-layer l applies the partial interface to the block
window ((l-1)*h_step, l*h_step], error-corrects the already-lowered blocks'
children at the lower level, and error-corrects the not-yet-processed
blocks at the current level. All accounting is exact integer arithmetic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .css import CodeFamily


def _poly_eval(coeffs: Sequence[int], x: int) -> int:
    return int(sum(c * x**k for k, c in enumerate(coeffs)))


@dataclass(frozen=True)
class ScheduleConstants:
    """Footprint constants: per-block qubit counts used by the census.

    Defaults are measured from the interface module's actual circuits:
    p1(m) is a per-level table with gamma_qubits(level) <= theta * p1(m) * m,
    and theta1 bounds the EC footprint (n + #checks) / m over the family.
    """

    theta: int
    theta1: int
    p1_table: dict[int, int]  # level -> p1(m_level)

    def p1(self, level: int) -> int:
        return self.p1_table[level]


def measured_constants(family: CodeFamily, knobs=None) -> ScheduleConstants:
    """Derive theta, theta1 and the p1 table from the real circuit footprints."""
    from .interface import build_gamma

    p1_table: dict[int, int] = {}
    theta1 = 1
    for r in range(2, family.depth + 1):
        code = family.level(r)
        ec_footprint = code.n + code.hx.nrows + code.hz.nrows
        theta1 = max(theta1, math.ceil(ec_footprint / code.m))
        plan = build_gamma(family, r, r - 1, knobs)
        p1_table[r] = math.ceil(plan.qubit_count / code.m)
    lvl1 = family.level(1)
    theta1 = max(theta1, lvl1.n)  # trivial code: one qubit per logical
    return ScheduleConstants(theta=1, theta1=theta1, p1_table=p1_table)


@dataclass(frozen=True)
class MacroLayer:
    """One macro-layer of a stage: which blocks do what."""

    level: int
    index: int              # l, 1-based within the stage
    gamma_blocks: tuple[int, int]   # half-open window of block indices (0-based)
    ec_child_blocks: int    # lowered children at level-1 receiving EC
    ec_level_blocks: int    # waiting blocks at the current level receiving EC

    @property
    def gamma_count(self) -> int:
        return self.gamma_blocks[1] - self.gamma_blocks[0]


@dataclass(frozen=True)
class Stage:
    level: int              # r'': the level being lowered to level-1
    h_level: int            # number of blocks entering this stage
    h_step: int             # blocks receiving the interface per macro-layer
    layers: tuple[MacroLayer, ...]

    @property
    def n_layers(self) -> int:
        return len(self.layers)


@dataclass(frozen=True)
class InterfaceSchedule:
    family: CodeFamily
    r: int
    r_prime: int
    h: int
    constants: ScheduleConstants
    stages: tuple[Stage, ...]

    @property
    def output_blocks(self) -> int:
        return self.h * 2 ** (self.r - self.r_prime)

    def to_json(self) -> str:
        obj = {
            "r": self.r,
            "r_prime": self.r_prime,
            "h": self.h,
            "constants": {
                "theta": self.constants.theta,
                "theta1": self.constants.theta1,
                "p1_table": {str(k): v for k, v in self.constants.p1_table.items()},
            },
            "stages": [
                {
                    "level": s.level,
                    "h_level": s.h_level,
                    "h_step": s.h_step,
                    "layers": [
                        {
                            "l": ml.index,
                            "gamma": list(ml.gamma_blocks),
                            "ec_child_blocks": ml.ec_child_blocks,
                            "ec_level_blocks": ml.ec_level_blocks,
                        }
                        for ml in s.layers
                    ],
                }
                for s in self.stages
            ],
        }
        return json.dumps(obj, indent=1)


def build_schedule(
    family: CodeFamily,
    r: int,
    r_prime: int,
    h: int,
    constants: Optional[ScheduleConstants] = None,
) -> InterfaceSchedule:
    """Plan the staged interface lowering h level-r blocks to level r'.

    Stage r'' processes h^{(r'')} = 2^{r-r''} h blocks in windows of
    h_step = ceil(h^{(r'')} / (theta * p1(m_{r''}))) per macro-layer; every
    block receives the partial interface exactly once per stage.
    """
    if h < 1:
        raise ValueError("h must be positive")
    if not 1 <= r_prime < r <= family.depth:
        raise ValueError("need 1 <= r' < r <= family depth")
    constants = constants or measured_constants(family)
    stages = []
    for level in range(r, r_prime, -1):
        h_level = h * 2 ** (r - level)
        h_step = math.ceil(h_level / (constants.theta * constants.p1(level)))
        n_layers = math.ceil(h_level / h_step)
        layers = []
        for l in range(1, n_layers + 1):
            lo = (l - 1) * h_step
            hi = min(l * h_step, h_level)
            layers.append(
                MacroLayer(
                    level=level,
                    index=l,
                    gamma_blocks=(lo, hi),
                    ec_child_blocks=2 * lo,
                    ec_level_blocks=h_level - hi,
                )
            )
        stages.append(Stage(level=level, h_level=h_level, h_step=h_step, layers=tuple(layers)))
    return InterfaceSchedule(
        family=family, r=r, r_prime=r_prime, h=h, constants=constants, stages=tuple(stages)
    )


@dataclass(frozen=True)
class LayerCensus:
    level: int
    layer: int
    eta1: int   # EC qubits
    eta2: int   # interface qubits
    bound1: int
    bound2: int

    @property
    def total(self) -> int:
        return self.eta1 + self.eta2


@dataclass
class OverheadReport:
    r: int
    r_prime: int
    h: int
    theta: int
    theta1: int
    per_layer: list[LayerCensus]
    max_total: int
    ratio: float          # max_total / (m_r * h)
    eta1_ok: bool
    eta2_ok: bool

    def rows(self) -> list[dict]:
        return [
            {
                "level": c.level,
                "layer": c.layer,
                "ec_qubits": c.eta1,
                "gamma_qubits": c.eta2,
                "total": c.total,
                "eta1_bound": c.bound1,
                "eta2_bound": c.bound2,
            }
            for c in self.per_layer
        ]


def qubit_census(schedule: InterfaceSchedule) -> OverheadReport:
    """Exact per-macro-layer qubit counts and the two overhead inequalities.

    eta1 sums theta1 * m per EC'd block (children at level-1, waiters at the
    level); eta2 sums theta * p1(m) * m per interface-active block. Verified
    exactly: eta1 <= theta1 * h * m_r and
    eta2 <= theta * m_r * h + theta * p1(m_r) * m_r.
    """
    fam = schedule.family
    consts = schedule.constants
    m_r = fam.level(schedule.r).m
    h = schedule.h
    per_layer: list[LayerCensus] = []
    eta1_ok = True
    eta2_ok = True
    bound1 = consts.theta1 * h * m_r
    bound2 = (
        consts.theta * m_r * h
        + consts.theta * consts.p1(schedule.r) * m_r
    )
    for stage in schedule.stages:
        m_lvl = fam.level(stage.level).m
        m_child = fam.level(stage.level - 1).m
        p1 = consts.p1(stage.level)
        for ml in stage.layers:
            eta1 = consts.theta1 * (ml.ec_child_blocks * m_child + ml.ec_level_blocks * m_lvl)
            eta2 = consts.theta * p1 * m_lvl * ml.gamma_count
            eta1_ok &= eta1 <= bound1
            eta2_ok &= eta2 <= bound2
            per_layer.append(
                LayerCensus(
                    level=stage.level,
                    layer=ml.index,
                    eta1=eta1,
                    eta2=eta2,
                    bound1=bound1,
                    bound2=bound2,
                )
            )
    max_total = max(c.total for c in per_layer)
    return OverheadReport(
        r=schedule.r,
        r_prime=schedule.r_prime,
        h=h,
        theta=consts.theta,
        theta1=consts.theta1,
        per_layer=per_layer,
        max_total=max_total,
        ratio=max_total / (m_r * h),
        eta1_ok=eta1_ok,
        eta2_ok=eta2_ok,
    )


@dataclass(frozen=True)
class BlockStagePlan:
    """What one descendant block experiences during one stage.

    Waits are in macro-layers: pre_wait at the current level before its
    window, the interface at macro-layer `gamma_layer`, post_wait at the
    lowered level afterwards. pre_wait + 1 + post_wait = stage length.
    """

    level: int
    block_index: int
    gamma_layer: int
    pre_wait: int
    post_wait: int


@dataclass(frozen=True)
class BlockPlan:
    input_block: int
    stages: tuple[tuple[BlockStagePlan, ...], ...]  # one tuple per stage

    def total_layer_count(self) -> int:
        # Every block is live through every macro-layer of every stage.
        return sum(
            plans[0].pre_wait + 1 + plans[0].post_wait for plans in self.stages
        )


def effective_interface(schedule: InterfaceSchedule, i: int) -> BlockPlan:
    """Per-block view: the sequence of waits and interface applications.

    Input block i (0-based) has 2^y descendants entering the stage at level
    r - y; descendant k (0-based within the block) sits at global index
    i * 2^y + k, lands in macro-layer l = floor(index / h_step) + 1, waits
    l - 1 macro-layers before and n_layers - l after.
    """
    if not 0 <= i < schedule.h:
        raise ValueError("block index out of range")
    stages = []
    for y, stage in enumerate(schedule.stages):
        children = 2**y
        plans = []
        for k in range(children):
            idx = i * children + k
            l = idx // stage.h_step + 1
            plans.append(
                BlockStagePlan(
                    level=stage.level,
                    block_index=idx,
                    gamma_layer=l,
                    pre_wait=l - 1,
                    post_wait=stage.n_layers - l,
                )
            )
        stages.append(tuple(plans))
    return BlockPlan(input_block=i, stages=tuple(stages))


@dataclass(frozen=True)
class FullPlan:
    """Schedule for Xi^{[h]}_r: staged lowering plus the final parallel
    level-r'-to-bare layer on every output block."""

    schedule: InterfaceSchedule
    final_gamma_qubits_per_block: int

    @property
    def final_blocks(self) -> int:
        return self.schedule.output_blocks

    @property
    def final_layer_qubits(self) -> int:
        return self.final_blocks * self.final_gamma_qubits_per_block

    def total_qubits(self) -> int:
        report = qubit_census(self.schedule)
        return max(report.max_total, self.final_layer_qubits)


def compose_full(
    schedule: InterfaceSchedule, gamma_r1_qubits_per_block: Optional[int] = None
) -> FullPlan:
    """Append the parallel Gamma_{r',1} layer on all output blocks.

    The per-block footprint defaults to the measured Gamma_{r',1} circuit
    size (a constant once r' is fixed).
    """
    if gamma_r1_qubits_per_block is None:
        from .interface import build_gamma

        if schedule.r_prime == 1:
            gamma_r1_qubits_per_block = schedule.family.level(1).n
        else:
            plan = build_gamma(schedule.family, schedule.r_prime, 1)
            gamma_r1_qubits_per_block = plan.qubit_count
    return FullPlan(
        schedule=schedule,
        final_gamma_qubits_per_block=gamma_r1_qubits_per_block,
    )


def audit_schedule(schedule: InterfaceSchedule) -> list[str]:
    """Exhaustive well-formedness audit; returns a list of violations.

    Per stage: every block receives the interface exactly once, and the
    three block sets partition the live blocks at every macro-layer.
    """
    problems = []
    for stage in schedule.stages:
        covered = []
        for ml in stage.layers:
            lo, hi = ml.gamma_blocks
            covered.extend(range(lo, hi))
            if ml.ec_child_blocks != 2 * lo:
                problems.append(f"level {stage.level} layer {ml.index}: child EC count")
            if ml.ec_level_blocks != stage.h_level - hi:
                problems.append(f"level {stage.level} layer {ml.index}: level EC count")
            if lo + ml.gamma_count + ml.ec_level_blocks != stage.h_level:
                problems.append(f"level {stage.level} layer {ml.index}: not a partition")
        if sorted(covered) != list(range(stage.h_level)):
            problems.append(f"level {stage.level}: blocks not covered exactly once")
    out = schedule.stages[-1]
    if 2 * out.h_level != schedule.output_blocks:
        problems.append("output block count mismatch")
    return problems


def roundtrip_from_block_plans(schedule: InterfaceSchedule) -> bool:
    """Tensoring the per-block plans reproduces the schedule exactly."""
    for y, stage in enumerate(schedule.stages):
        assignment = {}
        for i in range(schedule.h):
            plan = effective_interface(schedule, i)
            for sp in plan.stages[y]:
                assignment[sp.block_index] = sp.gamma_layer
        for ml in stage.layers:
            lo, hi = ml.gamma_blocks
            for idx in range(lo, hi):
                if assignment.get(idx) != ml.index:
                    return False
    return True
