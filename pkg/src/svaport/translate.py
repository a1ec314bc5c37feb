"""Porting assertions from one design onto another.

The pipeline resolves every identifier of a source assertion against the
target design (explicit alias -> exact name -> normalized name), annotates
each resolved signal with how it sits in the target's dependency graph,
drops signals that have no counterpart when a removable conjunct carries
them, rewrites the surviving expression onto target names, folds in the
extra conditions the target design needs, and finally searches for a
stimulus that exercises the result on the clean target.

Temporal structure is never touched: implication operator, cycle delays,
and ``$past`` depths pass through verbatim; only boolean leaves are
renamed, removed, or added.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import expr as ex
from .errors import ConfigError
from .graph import DependencyGraph, Relationship, build_graph, classify, fanin
from .monitor import check_assertion
from .netlist import Netlist
from .rng import substream
from .search import SearchBudget, batch_eval, input_cone, search_stimulus
from .sim import SimKernel, Stimulus, simulate
from .sva import Assertion, SeqExpr, signals_of

DEFAULT_SUFFIXES = ("_i", "_o", "_q", "_d", "_n")

_ATTACH = ("antecedent", "consequent")
_POSITION = ("first", "last")


# --------------------------------------------------------------------------
# signal map

@dataclass(frozen=True)
class Augmentation:
    """An extra condition the target design needs conjoined in.

    *signal* names the net the condition gates on (it must appear in the
    condition), *attach* picks the side of the implication, *position*
    whether the condition lands before or after the ported conjuncts, and
    *applies_to* restricts the rule to particular assertions (empty tuple
    means every assertion translated with this map).
    """

    signal: str
    condition: ex.Expr
    attach: str
    position: str = "last"
    applies_to: tuple[str, ...] = ()
    note: str = ""


@dataclass(frozen=True)
class NamingRule:
    """Output naming for one translated assertion."""

    applies_to: str
    property_name: str | None = None
    label: str | None = None
    error: str | None = None


@dataclass
class SignalMap:
    """Alias table plus per-design translation hints, loaded from JSON."""

    mappings: dict[str, str] = field(default_factory=dict)
    augmentations: list[Augmentation] = field(default_factory=list)
    suffixes: tuple[str, ...] = DEFAULT_SUFFIXES
    prefixes: tuple[str, ...] = ()
    naming: list[NamingRule] = field(default_factory=list)
    manual_sources: set[str] = field(default_factory=set)

    def add_manual(self, source: str, target: str) -> None:
        if source in self.mappings and self.mappings[source] != target:
            raise ConfigError(f"conflicting mapping for {source}")
        self.mappings[source] = target
        self.manual_sources.add(source)

    def origin_of(self, source: str) -> str:
        return "manual" if source in self.manual_sources else "alias_file"

    @staticmethod
    def from_dict(data: dict) -> "SignalMap":
        known = {"mappings", "augmentations", "normalize", "naming"}
        stray = set(data) - known
        if stray:
            raise ConfigError(f"unknown signal-map keys: {', '.join(sorted(stray))}")
        m = SignalMap()
        for row in data.get("mappings", []):
            src, tgt = row.get("source"), row.get("target")
            if not src or not tgt:
                raise ConfigError(f"mapping needs source and target: {row}")
            if src in m.mappings:
                raise ConfigError(f"duplicate mapping for {src}")
            m.mappings[src] = tgt
        for row in data.get("augmentations", []):
            attach = row.get("attach")
            if attach not in _ATTACH:
                raise ConfigError(f"augmentation attach must be one of {_ATTACH}")
            position = row.get("position", "last")
            if position not in _POSITION:
                raise ConfigError(f"augmentation position must be one of {_POSITION}")
            cond = ex.parse_expr_text(row["condition"])
            signal = row.get("signal", "")
            if signal not in ex.idents_of(cond):
                raise ConfigError(
                    f"augmentation signal {signal!r} does not appear in its "
                    f"condition {row['condition']!r}")
            m.augmentations.append(Augmentation(
                signal=signal, condition=cond, attach=attach, position=position,
                applies_to=tuple(row.get("applies_to", [])),
                note=row.get("note", "")))
        norm = data.get("normalize", {})
        if "suffixes" in norm:
            m.suffixes = tuple(norm["suffixes"])
        if "prefixes" in norm:
            m.prefixes = tuple(norm["prefixes"])
        for row in data.get("naming", []):
            if "applies_to" not in row:
                raise ConfigError("naming rule needs applies_to")
            m.naming.append(NamingRule(
                applies_to=row["applies_to"],
                property_name=row.get("property"),
                label=row.get("label"),
                error=row.get("error")))
        return m

    @staticmethod
    def load(path: str | Path, netlist: Netlist | None = None) -> "SignalMap":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as err:
            raise ConfigError(f"{path}: not valid JSON ({err})") from err
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: signal map must be a JSON object")
        m = SignalMap.from_dict(data)
        if netlist is not None:
            m.validate(netlist)
        return m

    def validate(self, netlist: Netlist) -> None:
        """Every mapped target and augmentation identifier must exist."""
        for src, tgt in self.mappings.items():
            if not netlist.resolves(tgt):
                raise ConfigError(
                    f"mapping {src} -> {tgt}: {tgt} is not a net or "
                    f"parameter of {netlist.name}")
        for aug in self.augmentations:
            for name in sorted(ex.idents_of(aug.condition)):
                if not netlist.resolves(name):
                    raise ConfigError(
                        f"augmentation on {aug.signal}: {name} is not a net "
                        f"or parameter of {netlist.name}")


def _normalize(name: str, suffixes: tuple[str, ...],
               prefixes: tuple[str, ...]) -> str:
    """Case-fold and strip at most one suffix and one prefix.

    A single pass is deliberate: it keeps loosely related infrastructure
    names (say ``rst`` vs ``rst_ni``) from colliding while still folding the
    common port/register decorations away.
    """
    out = name.casefold()
    for suf in sorted(suffixes, key=len, reverse=True):
        if suf and out.endswith(suf.casefold()) and len(out) > len(suf):
            out = out[: -len(suf)]
            break
    for pre in sorted(prefixes, key=len, reverse=True):
        if pre and out.startswith(pre.casefold()) and len(out) > len(pre):
            out = out[len(pre):]
            break
    return out


# --------------------------------------------------------------------------
# link report

MATCHED = "matched"
DROPPED = "dropped"
UNRESOLVED = "unresolved"


@dataclass
class LinkEntry:
    """Outcome for one source-assertion signal."""

    source: str
    status: str
    method: str
    target: str | None = None
    relationship: Relationship | None = None
    fanin: tuple[str, ...] = ()
    gating_candidates: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        rel = None
        if self.relationship is not None:
            rel = {
                "kind": self.relationship.kind.value,
                "depth": self.relationship.depth,
                "path": list(self.relationship.witness_path),
            }
        return {
            "source": self.source,
            "status": self.status,
            "method": self.method,
            "target": self.target,
            "relationship": rel,
            "fanin": list(self.fanin),
            "gating_candidates": list(self.gating_candidates),
        }


@dataclass
class LinkReport:
    """Per-signal linking outcomes for one assertion against one design."""

    assertion: Assertion
    target_module: str
    entries: dict[str, LinkEntry]
    clock_source: str = ""
    clock_target: str | None = None
    clock_method: str = ""
    disable_dropped: bool = False
    disable_reason: str = ""

    def entry(self, name: str) -> LinkEntry:
        return self.entries[name]

    def with_status(self, status: str) -> list[LinkEntry]:
        return [e for e in self.entries.values() if e.status == status]

    def unresolved(self) -> list[LinkEntry]:
        return sorted(self.with_status(UNRESOLVED), key=lambda e: e.source)

    def rename_table(self) -> dict[str, str]:
        return {e.source: e.target for e in self.entries.values()
                if e.status == MATCHED and e.target is not None}

    def to_dict(self) -> dict:
        return {
            "assertion": self.assertion.effective_name(),
            "target_module": self.target_module,
            "clock": {
                "source": self.clock_source,
                "target": self.clock_target,
                "method": self.clock_method,
            },
            "disable": {
                "present": self.assertion.disable is not None,
                "dropped": self.disable_dropped,
                "reason": self.disable_reason,
            },
            "signals": [self.entries[k].to_dict() for k in sorted(self.entries)],
        }


# --------------------------------------------------------------------------
# pipeline stages

def _resolve(name: str, target: Netlist, smap: SignalMap,
             norm_index: dict[str, list[str]]) -> tuple[str | None, str]:
    """Resolution chain for one identifier: (target name, method text)."""
    if name in smap.mappings:
        return smap.mappings[name], smap.origin_of(name)
    if target.resolves(name):
        return name, "exact"
    key = _normalize(name, smap.suffixes, smap.prefixes)
    candidates = norm_index.get(key, [])
    if len(candidates) == 1:
        return candidates[0], "normalized"
    if len(candidates) > 1:
        return None, "ambiguous normalized match: " + ", ".join(candidates)
    return None, f"no exact or normalized counterpart in {target.name}"


def _norm_index(target: Netlist, smap: SignalMap) -> dict[str, list[str]]:
    index: dict[str, list[str]] = {}
    names = sorted(target.nets) + sorted(target.params)
    for cand in names:
        index.setdefault(_normalize(cand, smap.suffixes, smap.prefixes), []).append(cand)
    return index


def identify_signals(source: Assertion, target: Netlist,
                     smap: SignalMap) -> LinkReport:
    """Resolve every assertion identifier (and the clock) against the target."""
    index = _norm_index(target, smap)
    entries: dict[str, LinkEntry] = {}
    for name in sorted(signals_of(source)):
        tgt, method = _resolve(name, target, smap, index)
        if tgt is None:
            entries[name] = LinkEntry(name, UNRESOLVED, method)
        else:
            entries[name] = LinkEntry(name, MATCHED, method, target=tgt)
    report = LinkReport(source, target.name, entries, clock_source=source.clock)
    clk, method = _resolve(source.clock, target, smap, index)
    if clk is None and len(target.clock_nets()) == 1:
        clk, method = next(iter(target.clock_nets())), "sole clock of target"
    report.clock_target, report.clock_method = clk, method
    return report


def trace_internal_logic(report: LinkReport,
                         graph: DependencyGraph,
                         netlist: Netlist) -> LinkReport:
    """Annotate matched signals with their place in the target's logic.

    Records the full fan-in cone, the direct reads of the signal's driver
    (the conditions a gating augmentation would come from), and how the
    signal relates to the nearest primary input feeding it.
    """
    inputs = {n.name for n in netlist.inputs()}
    for entry in report.entries.values():
        if entry.status != MATCHED or entry.target is None:
            continue
        name = entry.target
        if not graph.has_node(name):
            continue  # parameters have no node
        cone = fanin(graph, name)
        entry.fanin = tuple(sorted(cone))
        entry.gating_candidates = graph.reads_of(name)
        feeding = [(depth, n) for n, depth in cone.items() if n in inputs]
        if feeding:
            _, nearest = min(feeding)
            entry.relationship = classify(graph, name, nearest)
    return report


@dataclass(frozen=True)
class DropPolicy:
    """What may be discarded when a signal has no counterpart."""

    drop_removable_conjuncts: bool = True
    drop_unresolved_disable: bool = True


def _functional_signals(a: Assertion) -> set[str]:
    out: set[str] = set()
    for term in a.antecedent.terms() + a.consequent.terms():
        out |= ex.idents_of(term)
    return out


def _strip_conjuncts(seq: SeqExpr, doomed: set[str]) -> SeqExpr | None:
    """Remove every conjunct mentioning a doomed signal; None if a step empties."""
    steps = []
    for delay, term in seq.steps:
        keep = [c for c in ex.conjuncts(term) if not (ex.idents_of(c) & doomed)]
        if not keep:
            return None
        steps.append((delay, ex.conjoin(keep)))
    return SeqExpr(tuple(steps))


def drop_untranslatable(report: LinkReport, policy: DropPolicy) -> LinkReport:
    """Decide the fate of unresolved signals.

    A signal carried only by removable conjuncts is dropped (the conjunct
    goes with it); one whose removal would leave an implication side empty
    stays unresolved.  A disable expression referencing signals without
    counterparts is removed wholesale when the policy allows — losing a
    reset guard weakens nothing an implication checks.
    """
    a = report.assertion
    functional = _functional_signals(a)
    disable_ids = ex.idents_of(a.disable) if a.disable is not None else set()

    candidates = {e.source for e in report.unresolved() if e.source in functional}
    if policy.drop_removable_conjuncts:
        doomed = set(candidates)
        while doomed:
            blocked: set[str] = set()
            for seq in (a.antecedent, a.consequent):
                for _, term in seq.steps:
                    cs = ex.conjuncts(term)
                    if all(ex.idents_of(c) & doomed for c in cs):
                        for c in cs:
                            blocked |= ex.idents_of(c) & doomed
            if not blocked:
                break
            for name in blocked:
                entry = report.entries[name]
                entry.method += ("; dropping it would empty the "
                                 "antecedent or consequent")
            doomed -= blocked
        for name in doomed:
            entry = report.entries[name]
            entry.status = DROPPED
            entry.method = "removable conjunct dropped: " + entry.method

    if a.disable is not None:
        unresolved_disable = {
            n for n in disable_ids
            if report.entries[n].status != MATCHED}
        if unresolved_disable and policy.drop_unresolved_disable:
            report.disable_dropped = True
            report.disable_reason = (
                "disable expression references "
                + ", ".join(sorted(unresolved_disable))
                + " with no counterpart; clause removed")
            for name in unresolved_disable:
                entry = report.entries[name]
                if entry.status == UNRESOLVED and name not in functional:
                    entry.status = DROPPED
                    entry.method = "disable clause removed: " + entry.method
    return report


# --------------------------------------------------------------------------
# translation

@dataclass
class TranslationConfig:
    """Knobs for the rewrite and the activation search."""

    negation_to_eq0: bool = True
    drop_policy: DropPolicy = field(default_factory=DropPolicy)
    budget: SearchBudget = field(default_factory=lambda: SearchBudget(exhaustive_bits=20))
    seed: int = 0
    generate_testcase: bool = True
    key: str | None = None  # naming/augmentation selector; default derived


@dataclass
class Translatable:
    assertion: Assertion
    testcase: Stimulus | None


@dataclass
class Untranslatable:
    reasons: list[str]


@dataclass
class TranslationOutcome:
    verdict: Translatable | Untranslatable
    link_report: LinkReport
    notes: list[str] = field(default_factory=list)

    @property
    def translatable(self) -> bool:
        return isinstance(self.verdict, Translatable)


def assertion_key(a: Assertion, index: int = 0) -> str:
    """Stable handle used by augmentation/naming selectors."""
    return a.label or a.name or f"#{index}"


def _restyle(term: ex.Expr, enabled: bool) -> ex.Expr:
    """Render plain negations of a name as comparisons with zero."""
    if not enabled:
        return term
    out = []
    for c in ex.conjuncts(term):
        if isinstance(c, ex.Unary) and c.op == "!" and \
                isinstance(c.operand, (ex.Ident, ex.Select)):
            c = ex.Binary("==", c.operand, ex.Const(0))
        out.append(c)
    return ex.conjoin(out)


def _apply_augmentations(seq: SeqExpr, augs: list[Augmentation],
                         attach: str) -> SeqExpr:
    """Conjoin extra conditions into the step where the implication binds:
    the last antecedent step, the first consequent step."""
    ours = [g for g in augs if g.attach == attach]
    if not ours:
        return seq
    steps = list(seq.steps)
    idx = len(steps) - 1 if attach == "antecedent" else 0
    delay, term = steps[idx]
    firsts = [g.condition for g in ours if g.position == "first"]
    lasts = [g.condition for g in ours if g.position == "last"]
    steps[idx] = (delay, ex.conjoin(firsts + ex.conjuncts(term) + lasts))
    return SeqExpr(tuple(steps))


def translate(source: Assertion, target: Netlist, smap: SignalMap,
              config: TranslationConfig | None = None, *,
              graph: DependencyGraph | None = None,
              kernel: SimKernel | None = None) -> TranslationOutcome:
    """Run the whole pipeline for one assertion.

    Either every identifier finds a home (verdict carries the rewritten
    assertion plus a stimulus driving its antecedent), or the unresolved
    identifiers are listed one reason apiece.
    """
    config = config or TranslationConfig()
    smap.validate(target)
    graph = graph or build_graph(target)

    report = identify_signals(source, target, smap)
    report = trace_internal_logic(report, graph, target)
    report = drop_untranslatable(report, config.drop_policy)

    unresolved = report.unresolved()
    if report.clock_target is None:
        return TranslationOutcome(
            Untranslatable([f"clock {source.clock}: {report.clock_method}"]
                           + [f"{e.source}: {e.method}" for e in unresolved]),
            report)
    if unresolved:
        return TranslationOutcome(
            Untranslatable([f"{e.source}: {e.method}" for e in unresolved]),
            report)

    dropped = {e.source for e in report.with_status(DROPPED)}
    table = report.rename_table()
    key = config.key or assertion_key(source)
    augs = [g for g in smap.augmentations
            if not g.applies_to or key in g.applies_to]

    def rebuild(seq: SeqExpr) -> SeqExpr:
        reduced = _strip_conjuncts(seq, dropped)
        assert reduced is not None  # drop stage guarantees non-empty steps
        steps = tuple(
            (delay, _restyle(ex.rename(term, table), config.negation_to_eq0))
            for delay, term in reduced.steps)
        return SeqExpr(steps)

    ante = _apply_augmentations(rebuild(source.antecedent), augs, "antecedent")
    cons = _apply_augmentations(rebuild(source.consequent), augs, "consequent")

    disable = None
    if source.disable is not None and not report.disable_dropped:
        disable = ex.rename(source.disable, table)

    out = replace(source, antecedent=ante, consequent=cons,
                  clock=report.clock_target, disable=disable)
    rule = next((n for n in smap.naming if n.applies_to == key), None)
    if rule is not None:
        out = replace(out,
                      name=rule.property_name or out.name,
                      label=rule.label or out.label,
                      action=rule.error or out.action)

    notes: list[str] = []
    testcase = None
    if config.generate_testcase:
        testcase = generate_testcase(out, target, config,
                                     graph=graph, kernel=kernel)
        if testcase is None:
            notes.append("no stimulus found that drives the antecedent "
                         "within the search budget")
    return TranslationOutcome(Translatable(out, testcase), report, notes)


# --------------------------------------------------------------------------
# test-case generation

def generate_testcase(a: Assertion, target: Netlist,
                      config: TranslationConfig | None = None, *,
                      graph: DependencyGraph | None = None,
                      kernel: SimKernel | None = None) -> Stimulus | None:
    """Find inputs under which *a* passes non-vacuously on the clean design.

    Batch simulation filters for stimuli whose first antecedent term fires
    early enough for the full sequence to fit the horizon; a monitor run
    confirms at least one completed, non-vacuous pass and no failure.
    """
    config = config or TranslationConfig()
    graph = graph or build_graph(target)
    kernel = kernel or SimKernel(target)
    budget = config.budget
    span = a.antecedent.span() + a.consequent.span() + \
        (1 if a.implication == "|=>" else 0)
    window = max(budget.horizon - span, 1)

    params = {name: p.value for name, p in target.params.items()}
    first_term = a.antecedent.steps[0][1]

    def rough(arrays: dict[str, np.ndarray],
              inputs: dict[str, np.ndarray]) -> np.ndarray:
        def env(name: str) -> np.ndarray:
            if name in params:
                return np.uint64(params[name])
            return arrays[name]
        hot = batch_eval(first_term, env, target.width) != 0
        return hot[:, :window].any(axis=1)

    def accept(stim: Stimulus) -> bool:
        verdict = check_assertion(simulate(target, stim), a)
        return verdict.failure_count == 0 and verdict.non_vacuous_passes >= 1

    cone = input_cone(target, graph, signals_of(a))
    rng = substream(config.seed, "translate", "testcase", a.effective_name())
    stim, _stats = search_stimulus(target, cone, {}, rough, accept, rng,
                                   budget, kernel=kernel)
    return stim
