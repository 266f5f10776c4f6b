"""Evolutionary optimizers over the 45-term vector.

Two entry points: a single-objective GA that fits parameterized hulls to
target point clouds by Chamfer distance, and NSGA-II for bi-objective drag
minimization (total resistance and interpolated wave-drag coefficient) with
parameter masks so case studies can vary only bulbs or only the hull ends.

Both use simulated-binary crossover and polynomial mutation on the real
vector with bounds clipping, tournament selection, and feasibility-first
ranking: any feasible individual beats any infeasible one, and infeasible
individuals are ordered by violated-constraint count.  Candidates violating
constraints are first repaired by resampling the terms implicated by the
failing constraints (up to 10 rounds).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import hydro, names
from .errors import DomainError, SamplingError
from .mesh import wetted_surface_area
from .params import HullParameters, ParameterRanges, check_feasibility
from .surface import HullSurface, PointCloud, generate_point_cloud
from .surrogate import SurrogateModel

# terms implicated by each constraint family, used for targeted repair
_FAMILY_TERMS: dict[str, list[int]] = {
    "range": list(range(names.N_TERMS)),
    "taper-overlap": [names.I_LBOW, names.I_LSTERN],
    "section": [names.I_DEADRISE, names.I_RCHINE, names.I_RKEEL, names.I_YCHINE,
                names.I_DEPTH],
    "transom": [names.IDX["transom_bottom_height_frac"],
                names.IDX["transom_deadrise_deg"],
                names.I_BTRANSOM,
                names.IDX["stern_waterplane_fullness_exponent"],
                names.I_DEADRISE, names.I_RCHINE, names.I_YCHINE],
    "envelope": [names.IDX["bow_rake_deg"], names.IDX["bow_keelrise_start_frac"],
                 names.IDX["bow_midbody_transition_frac"],
                 names.IDX["stern_rake_deg"], names.IDX["stern_keelrise_start_frac"],
                 names.IDX["stern_midbody_transition_frac"],
                 names.I_LBOW, names.I_LSTERN, names.I_DEPTH],
    "taper-cubic": [names.IDX["bow_drift_deck_deg"], names.IDX["bow_drift_keel_deg"],
                    names.IDX["bow_waterplane_fullness_exponent"],
                    names.IDX["stern_drift_deck_deg"], names.IDX["stern_drift_exponent"],
                    names.I_LBOW, names.I_LSTERN, names.I_BEAM],
    "bow-bulb": list(range(31, 38)),
    "stern-bulb": list(range(38, 45)),
}


@dataclass
class GaConfig:
    population: int = 100
    generations: int = 100
    tournament: int = 2
    crossover_rate: float = 0.9
    mutation_rate: float | None = None         # default 1 / n_free_terms
    eta_crossover: float = 12.0
    eta_mutation: float = 20.0
    elitism: int = 2
    seed: int = 0
    frozen: np.ndarray | None = None            # bool (45,) terms held fixed
    frozen_values: np.ndarray | None = None     # values for frozen terms
    lower: np.ndarray | None = None             # sampling bounds, default subset 1
    upper: np.ndarray | None = None
    initial: list = field(default_factory=list)  # HullParameters to inject

    def __post_init__(self):
        if self.population < 2:
            raise DomainError("population must be >= 2")
        if self.generations < 1:
            raise DomainError("generations must be >= 1")
        for rate in (self.crossover_rate, self.mutation_rate):
            if rate is not None and not 0.0 <= rate <= 1.0:
                raise DomainError("rates must lie in [0, 1]")
        base = ParameterRanges.for_subset(1)
        if self.lower is None:
            self.lower = base.lower.copy()
        if self.upper is None:
            self.upper = base.upper.copy()
        if self.frozen is None:
            self.frozen = np.zeros(names.N_TERMS, dtype=bool)
        self.frozen = np.asarray(self.frozen, dtype=bool)
        if self.frozen_values is None:
            self.frozen_values = 0.5 * (self.lower + self.upper)
        self.frozen_values = np.asarray(self.frozen_values, dtype=float)
        if self.elitism < 0 or self.elitism >= self.population:
            raise DomainError("elitism must be in [0, population)")

    @property
    def free_mask(self) -> np.ndarray:
        return ~self.frozen

    def effective_mutation_rate(self) -> float:
        if self.mutation_rate is not None:
            return self.mutation_rate
        n_free = max(int(self.free_mask.sum()), 1)
        return 1.0 / n_free


def mask_for(scope: str) -> np.ndarray:
    """Frozen-term mask for the named case-study scope.

    "bulbs" frees only the 14 bulb terms; "ends" frees the 20 taper terms
    plus the 14 bulb terms.  Everything else (loa, principal dimensions,
    cross section) stays frozen.
    """
    frozen = np.ones(names.N_TERMS, dtype=bool)
    if scope == "bulbs":
        frozen[names.BULB_SLICE] = False
    elif scope == "ends":
        frozen[names.TAPER_SLICE] = False
        frozen[names.BULB_SLICE] = False
    else:
        raise DomainError(f"unknown mask scope '{scope}' (expected bulbs|ends)")
    return frozen


# --------------------------------------------------------------------------- #
# variation operators
# --------------------------------------------------------------------------- #

def _sbx_pair(rng, p1, p2, lo, hi, eta, rate, free):
    c1, c2 = p1.copy(), p2.copy()
    if rng.random() > rate:
        return c1, c2
    for k in np.flatnonzero(free):
        if rng.random() > 0.5 or abs(p1[k] - p2[k]) < 1e-14:
            continue
        x1, x2 = sorted((p1[k], p2[k]))
        u = rng.random()
        beta = (2 * u) ** (1 / (eta + 1)) if u <= 0.5 else (1 / (2 * (1 - u))) ** (1 / (eta + 1))
        v1 = 0.5 * ((x1 + x2) - beta * (x2 - x1))
        v2 = 0.5 * ((x1 + x2) + beta * (x2 - x1))
        if rng.random() < 0.5:
            v1, v2 = v2, v1
        c1[k] = np.clip(v1, lo[k], hi[k])
        c2[k] = np.clip(v2, lo[k], hi[k])
    return c1, c2


def _poly_mutate(rng, x, lo, hi, eta, rate, free):
    y = x.copy()
    for k in np.flatnonzero(free):
        if rng.random() > rate:
            continue
        span = hi[k] - lo[k]
        if span <= 0:
            continue
        u = rng.random()
        if u < 0.5:
            delta = (2 * u) ** (1 / (eta + 1)) - 1.0
        else:
            delta = 1.0 - (2 * (1 - u)) ** (1 / (eta + 1))
        y[k] = np.clip(y[k] + delta * span, lo[k], hi[k])
    return y


def _apply_frozen(vec, config: GaConfig) -> np.ndarray:
    out = vec.copy()
    out[config.frozen] = config.frozen_values[config.frozen]
    return out


def _violations(vec) -> tuple[int, list[str]]:
    report = check_feasibility(vec)
    return report.n_violated, [c.family for c in report.violated]


def _repair(rng, vec, config: GaConfig, rounds: int = 10) -> tuple[np.ndarray, int]:
    """Resample terms implicated by failing constraints; returns best found."""
    lo, hi = config.lower, config.upper
    best = vec
    best_bad, families = _violations(vec)
    for _ in range(rounds):
        if best_bad == 0:
            break
        terms = sorted({t for fam in families for t in _FAMILY_TERMS.get(fam, [])})
        terms = [t for t in terms if config.free_mask[t]]
        if not terms:
            break
        cand = best.copy()
        for t in terms:
            cand[t] = lo[t] + (hi[t] - lo[t]) * rng.random()
        cand = _apply_frozen(cand, config)
        bad, fams = _violations(cand)
        if bad < best_bad:
            best, best_bad, families = cand, bad, fams
    return best, best_bad


def _sample_population(rng, config: GaConfig, max_tries: int = 20_000):
    """Initial population of feasible individuals (plus injected seeds)."""
    pop = []
    for init in config.initial[: config.population]:
        vec = init.values if isinstance(init, HullParameters) else np.asarray(init, float)
        vec = _apply_frozen(vec, config)
        if check_feasibility(vec).feasible:
            pop.append(vec)
    tries = 0
    lo, hi = config.lower, config.upper
    while len(pop) < config.population:
        if tries >= max_tries:
            if not pop:
                raise SamplingError(
                    "could not sample any feasible individual for the initial "
                    f"population in {max_tries} attempts", attempts=max_tries)
            pop.append(pop[len(pop) % max(len(pop), 1)].copy())
            continue
        tries += 1
        vec = _apply_frozen(lo + (hi - lo) * rng.random(names.N_TERMS), config)
        vec, bad = _repair(rng, vec, config, rounds=3)
        if bad == 0:
            pop.append(vec)
    return pop


# --------------------------------------------------------------------------- #
# single-objective GA: hull reconstruction from a target cloud
# --------------------------------------------------------------------------- #

class _ChamferObjective:
    """Chamfer distance to a fixed target cloud, target tree cached."""

    def __init__(self, target: PointCloud, nx: int = 150, nz: int = 30):
        self.target_pts = target.points
        self.tree_target = cKDTree(self.target_pts)
        self.nx = nx
        self.nz = nz
        self.ref_len = float(self.target_pts[:, 0].max() - self.target_pts[:, 0].min())

    def __call__(self, vec: np.ndarray) -> float:
        surf = HullSurface(HullParameters(vec), check=False)
        cloud = generate_point_cloud(surf, self.nx, self.nz, mirror=True)
        pts = cloud.points
        d_ab, _ = self.tree_target.query(pts, k=1)
        d_ba, _ = cKDTree(pts).query(self.target_pts, k=1)
        return (float(np.sum(d_ab**2)) + float(np.sum(d_ba**2))) / (len(pts) + len(self.target_pts))


def reconstruct_hull(target: PointCloud, config: GaConfig,
                     nx: int = 150, nz: int = 30):
    """Fit the parameterization to a target cloud by minimizing Chamfer CD.

    Freezes loa to the target's x-extent.  Returns (best HullParameters,
    ChamferResult, per-generation best-cd history).
    """
    from .chamfer import chamfer_distance  # local to avoid import cycle

    if len(target) == 0:
        raise DomainError("target cloud is empty")
    rng = np.random.default_rng(config.seed)
    frozen = config.frozen.copy()
    frozen_values = config.frozen_values.copy()
    frozen[names.I_LOA] = True
    frozen_values[names.I_LOA] = float(target.points[:, 0].max() - target.points[:, 0].min())
    config = GaConfig(
        population=config.population, generations=config.generations,
        tournament=config.tournament, crossover_rate=config.crossover_rate,
        mutation_rate=config.mutation_rate, eta_crossover=config.eta_crossover,
        eta_mutation=config.eta_mutation, elitism=max(config.elitism, 1),
        seed=config.seed, frozen=frozen, frozen_values=frozen_values,
        lower=config.lower, upper=config.upper, initial=config.initial,
    )
    objective = _ChamferObjective(target, nx=nx, nz=nz)

    pop = _sample_population(rng, config)
    fitness = np.array([objective(v) for v in pop])
    history = []
    p_mut = config.effective_mutation_rate()

    for _ in range(config.generations):
        order = np.argsort(fitness, kind="stable")
        pop = [pop[i] for i in order]
        fitness = fitness[order]
        history.append(float(fitness[0]))

        next_pop = [pop[i].copy() for i in range(config.elitism)]
        while len(next_pop) < config.population:
            idx1 = min(rng.integers(0, config.population, size=config.tournament))
            idx2 = min(rng.integers(0, config.population, size=config.tournament))
            c1, c2 = _sbx_pair(rng, pop[idx1], pop[idx2], config.lower, config.upper,
                               config.eta_crossover, config.crossover_rate,
                               config.free_mask)
            for child in (c1, c2):
                if len(next_pop) >= config.population:
                    break
                child = _poly_mutate(rng, child, config.lower, config.upper,
                                     config.eta_mutation, p_mut, config.free_mask)
                child = _apply_frozen(child, config)
                child, bad = _repair(rng, child, config)
                if bad > 0:
                    child = pop[int(rng.integers(0, max(config.elitism, 1)))].copy()
                next_pop.append(child)
        new_fitness = np.array([objective(v) for v in next_pop])
        # keep the elite untouched: their fitness is already known
        new_fitness[: config.elitism] = fitness[: config.elitism]
        pop, fitness = next_pop, new_fitness

    order = np.argsort(fitness, kind="stable")
    best_vec = pop[order[0]]
    best = HullParameters(best_vec)
    surf = HullSurface(best, check=False)
    cloud = generate_point_cloud(surf, nx, nz, mirror=True)
    result = chamfer_distance(cloud, target, reference_length=objective.ref_len)
    history.append(float(fitness[order[0]]))
    return best, result, history


# --------------------------------------------------------------------------- #
# NSGA-II: bi-objective drag minimization
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class DragCondition:
    speed: float          # m/s
    draft_frac: float     # fraction of hull depth
    rho: float = hydro.RHO_SEAWATER
    nu: float = hydro.NU_SEAWATER


@dataclass
class ParetoMember:
    params: HullParameters
    rt: float
    cw: float
    feasible: bool
    rank: int
    rt_surrogate: float | None = None


@dataclass
class ParetoSet:
    members: list[ParetoMember]
    evaluator: str
    condition: DragCondition

    def front(self) -> list[ParetoMember]:
        return [m for m in self.members if m.rank == 0]

    def best_rt(self) -> ParetoMember:
        return min(self.members, key=lambda m: m.rt)


class _SurrogateDragObjective:
    def __init__(self, model: SurrogateModel, cond: DragCondition,
                 area_grid=(120, 48)):
        self.model = model
        self.cond = cond
        self.area_grid = area_grid

    def __call__(self, vec: np.ndarray) -> tuple[float, float]:
        surf = HullSurface(HullParameters(vec), check=False)
        draft = self.cond.draft_frac * surf.depth
        lwl = surf.waterline_length(draft)
        fn = hydro.speed_to_froude(self.cond.speed, lwl)
        log_cw = self.model.predict(vec[names.SHAPE_SLICE])
        cw_grid = 10.0 ** log_cw.reshape(4, 8)
        table = hydro.DragTable(
            loa=surf.loa,
            draft_fracs=np.array(hydro.DRAFT_FRACTIONS),
            froude_numbers=np.array(hydro.FROUDE_NUMBERS),
            lwl=np.full(4, lwl), aws=np.zeros(4),
            cw=cw_grid, rw=np.zeros((4, 8)), rf=np.zeros((4, 8)), rt=np.zeros((4, 8)),
        )
        fn_q = float(np.clip(fn, table.froude_numbers[0], table.froude_numbers[-1]))
        cw = hydro.interpolate_cw(table, fn_q, float(np.clip(
            self.cond.draft_frac, table.draft_fracs[0], table.draft_fracs[-1])))
        rw = cw * 0.5 * self.cond.rho * self.cond.speed**2 * surf.loa**2
        aws = wetted_surface_area(surf, draft, *self.area_grid)
        re = self.cond.speed * lwl / self.cond.nu
        rf = 0.5 * hydro.friction_coefficient(re) * self.cond.rho * self.cond.speed**2 * aws
        return rw + rf, cw


class _DirectDragObjective:
    def __init__(self, cond: DragCondition, nx: int = 301, nz: int = 51,
                 area_grid=(160, 60)):
        self.cond = cond
        self.nx = nx
        self.nz = nz
        self.area_grid = area_grid

    def __call__(self, vec: np.ndarray) -> tuple[float, float]:
        surf = HullSurface(HullParameters(vec), check=False)
        draft = self.cond.draft_frac * surf.depth
        flow = hydro.FlowConditions(speed=self.cond.speed, draft=draft,
                                    rho=self.cond.rho, nu=self.cond.nu)
        rw, rf, rt = hydro.total_resistance(surf, flow, self.nx, self.nz,
                                            self.area_grid)
        cw = hydro.wave_drag_coefficient(rw, flow, surf.loa)
        return rt, cw


def _fast_non_dominated_sort(objs: np.ndarray, infeas: np.ndarray) -> np.ndarray:
    """Ranks with feasibility-first dominance.

    objs: (N, 2) minimized objectives; infeas: (N,) violated-constraint
    counts (0 = feasible).  Feasible dominates infeasible; among infeasible,
    fewer violations dominates.
    """
    n = len(objs)
    dominates = np.zeros((n, n), dtype=bool)
    for i in range(n):
        fi, oi = infeas[i], objs[i]
        fj, oj = infeas, objs
        both_feasible = (fi == 0) & (fj == 0)
        dom_obj = np.all(oi <= oj, axis=1) & np.any(oi < oj, axis=1)
        dominates[i] = (both_feasible & dom_obj) | ((fi == 0) & (fj > 0)) | \
            ((fi > 0) & (fj > 0) & (fi < fj))
    np.fill_diagonal(dominates, False)
    n_dominators = dominates.sum(axis=0)
    ranks = np.full(n, -1)
    current = np.flatnonzero(n_dominators == 0)
    rank = 0
    remaining = dominates.copy()
    while len(current):
        ranks[current] = rank
        n_dominators = n_dominators - remaining[current].sum(axis=0)
        remaining[current] = False
        rank += 1
        current = np.flatnonzero((ranks == -1) & (n_dominators == 0))
    return ranks


def _crowding_distance(objs: np.ndarray) -> np.ndarray:
    n, m = objs.shape
    dist = np.zeros(n)
    for k in range(m):
        order = np.argsort(objs[:, k], kind="stable")
        dist[order[0]] = dist[order[-1]] = np.inf
        span = objs[order[-1], k] - objs[order[0], k]
        if span <= 0 or n < 3:
            continue
        dist[order[1:-1]] += (objs[order[2:], k] - objs[order[:-2], k]) / span
    return dist


def optimize_drag(seed_hull: HullParameters | None, condition: DragCondition,
                  config: GaConfig, evaluator: str = "surrogate",
                  model: SurrogateModel | None = None) -> ParetoSet:
    """NSGA-II minimizing (Rt, interpolated Cw) at one speed/draft condition.

    With the surrogate evaluator, the returned members' Rt values are
    re-evaluated with the direct Michell pipeline.
    """
    if evaluator == "surrogate":
        if model is None:
            raise DomainError("surrogate evaluator requires a trained model")
        objective = _SurrogateDragObjective(model, condition)
    elif evaluator == "direct":
        objective = _DirectDragObjective(condition)
    else:
        raise DomainError(f"unknown evaluator '{evaluator}'")

    if seed_hull is not None:
        frozen_values = seed_hull.values.copy()
        config = GaConfig(
            population=config.population, generations=config.generations,
            tournament=config.tournament, crossover_rate=config.crossover_rate,
            mutation_rate=config.mutation_rate, eta_crossover=config.eta_crossover,
            eta_mutation=config.eta_mutation, elitism=config.elitism,
            seed=config.seed, frozen=config.frozen, frozen_values=frozen_values,
            lower=config.lower, upper=config.upper,
            initial=list(config.initial) + [seed_hull],
        )

    rng = np.random.default_rng(config.seed)
    pop = _sample_population(rng, config)
    n = config.population

    def evaluate(vectors):
        objs = np.empty((len(vectors), 2))
        infeas = np.empty(len(vectors), dtype=int)
        for i, v in enumerate(vectors):
            bad, _ = _violations(v)
            infeas[i] = bad
            if bad == 0:
                objs[i] = objective(v)
            else:
                objs[i] = (np.inf, np.inf)
        return objs, infeas

    objs, infeas = evaluate(pop)
    p_mut = config.effective_mutation_rate()
    ranks = _fast_non_dominated_sort(objs, infeas)
    crowd = _crowding_distance(objs)

    for _ in range(config.generations):
        offspring = []
        while len(offspring) < n:
            picks = []
            for _ in range(2):
                i, j = rng.integers(0, n, size=2)
                better = i if (ranks[i], -crowd[i]) <= (ranks[j], -crowd[j]) else j
                picks.append(better)
            c1, c2 = _sbx_pair(rng, pop[picks[0]], pop[picks[1]],
                               config.lower, config.upper,
                               config.eta_crossover, config.crossover_rate,
                               config.free_mask)
            for child in (c1, c2):
                if len(offspring) >= n:
                    break
                child = _poly_mutate(rng, child, config.lower, config.upper,
                                     config.eta_mutation, p_mut, config.free_mask)
                child = _apply_frozen(child, config)
                child, _ = _repair(rng, child, config)
                offspring.append(child)
        off_objs, off_infeas = evaluate(offspring)
        all_pop = pop + offspring
        all_objs = np.vstack([objs, off_objs])
        all_infeas = np.concatenate([infeas, off_infeas])
        all_ranks = _fast_non_dominated_sort(all_objs, all_infeas)

        chosen: list[int] = []
        rank = 0
        while True:
            front = np.flatnonzero(all_ranks == rank)
            if len(front) == 0:
                break
            if len(chosen) + len(front) <= n:
                chosen.extend(front.tolist())
            else:
                dist = _crowding_distance(all_objs[front])
                order = np.argsort(-dist, kind="stable")
                chosen.extend(front[order[: n - len(chosen)]].tolist())
                break
            rank += 1
        pop = [all_pop[i] for i in chosen]
        objs = all_objs[chosen]
        infeas = all_infeas[chosen]
        ranks = _fast_non_dominated_sort(objs, infeas)
        crowd = _crowding_distance(objs)

    members = []
    direct = _DirectDragObjective(condition)
    for i, vec in enumerate(pop):
        if infeas[i] > 0:
            continue
        params = HullParameters(vec)
        rt, cw = objs[i]
        member = ParetoMember(params=params, rt=float(rt), cw=float(cw),
                              feasible=True, rank=int(ranks[i]))
        if evaluator == "surrogate":
            member.rt_surrogate = float(rt)
            rt_direct, cw_direct = direct(vec)
            member.rt = float(rt_direct)
            member.cw = float(cw_direct)
        members.append(member)
    if not members:
        raise SamplingError("no feasible members in the final population", attempts=n)
    members.sort(key=lambda m: (m.rank, m.rt))
    return ParetoSet(members=members, evaluator=evaluator, condition=condition)
