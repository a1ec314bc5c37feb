"""Cycle-accurate two-phase simulator.

Each cycle: primary inputs are applied, continuous assigns settle in
dependency order, the settled values are recorded (this is the snapshot
assertions sample), and then every register captures its next value
simultaneously — the update becomes visible in the following cycle.
Registers start at their reset value, or 0 when no reset is declared, and a
register whose reset net is active at the clock edge reloads its reset value
for the next cycle.

The settle/update step is compiled to a Python function once per netlist.
The same generated source runs in two flavors: scalar (plain ints, arbitrary
width) and batch (numpy uint64 arrays, many independent stimuli at once,
nets capped at 64 bits).  ``expr.evaluate`` stays available as the
independent slow-path oracle for this kernel.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import expr as ex
from .errors import ConfigError, ElaborationError, UnknownSignalError
from .netlist import Netlist, NetKind, combinational_closure


# --------------------------------------------------------------------------
# stimulus

@dataclass
class Stimulus:
    """Per-cycle values for every primary input.

    Construction normalizes the cycle maps so each one names every input
    explicitly: omitted inputs default to 0, except a reset net, which
    defaults to its inactive level so designs run unless a cycle explicitly
    asserts reset.
    """

    inputs: list[dict[str, int]]

    @property
    def cycles(self) -> int:
        return len(self.inputs)

    @staticmethod
    def for_design(netlist: Netlist, cycles: list[dict[str, int]]) -> "Stimulus":
        names = {n.name: n for n in netlist.inputs()}
        inactive = {}
        for r in netlist.registers:
            if r.reset is not None and r.reset.net in names:
                inactive[r.reset.net] = 1 - r.reset.active_level
        rows: list[dict[str, int]] = []
        for i, cycle in enumerate(cycles):
            row: dict[str, int] = {}
            for name, net in names.items():
                value = cycle.get(name, inactive.get(name, 0))
                if not 0 <= value < (1 << net.width):
                    raise ConfigError(
                        f"cycle {i}: value {value} does not fit input "
                        f"{name}[{net.width - 1}:0]")
                row[name] = value
            for name in cycle:
                if name not in names:
                    raise UnknownSignalError(f"{name} is not an input of {netlist.name}")
            rows.append(row)
        return Stimulus(rows)


def save_stimulus(stim: Stimulus, path: str | Path) -> None:
    """On disk a stimulus is a JSON array of per-cycle input maps."""
    Path(path).write_text(json.dumps(stim.inputs, indent=2) + "\n")


def load_stimulus(path: str | Path, netlist: Netlist) -> Stimulus:
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict) and "inputs" in data:
        data = data["inputs"]
    if not isinstance(data, list):
        raise ConfigError(f"{path}: expected a JSON array of input maps")
    return Stimulus.for_design(netlist, data)


# --------------------------------------------------------------------------
# traces

@dataclass
class Trace:
    """Settled per-cycle values of every net, plus the design's constants."""

    design: str
    nets: tuple[str, ...]
    widths: dict[str, int]
    params: dict[str, int]
    values: dict[str, list[int]]
    cycles: int

    def value(self, net: str, cycle: int) -> int:
        try:
            return self.values[net][cycle]
        except KeyError:
            raise UnknownSignalError(f"{net} is not a net of {self.design}") from None


# --------------------------------------------------------------------------
# compiled kernel

def _scalar_mux(c, a, b):
    return a if c else b


def _batch_mux(c, a, b):
    return np.where(c, a, b).astype(np.uint64)


def _batch_bit(x):
    return np.asarray(x).astype(np.uint64)


class SimKernel:
    """One netlist compiled into a reusable settle+update step function."""

    def __init__(self, netlist: Netlist):
        self.netlist = netlist
        self.input_names = tuple(n.name for n in netlist.inputs())
        self.reg_names = tuple(r.target for r in netlist.registers)
        self.net_order = tuple(netlist.nets)
        self.reg_init = tuple(
            (r.reset.value if r.reset is not None else 0)
            for r in netlist.registers)
        self._source = self._generate()
        scope: dict = {}
        exec(compile(self._source, f"<kernel:{netlist.name}>", "exec"), scope)
        self._fn = scope["_step"]

    # -- code generation ---------------------------------------------------

    def _width(self, name: str) -> int:
        return self.netlist.width(name)

    def _emit(self, e: ex.Expr) -> str:
        nl = self.netlist
        if isinstance(e, ex.Const):
            return str(e.value)
        if isinstance(e, ex.Ident):
            if e.name in nl.params:
                return str(nl.params[e.name].value)
            return f"v_{e.name}"
        if isinstance(e, ex.Select):
            w = e.msb - e.lsb + 1
            base = f"v_{e.base}" if e.base in nl.nets else str(nl.params[e.base].value)
            if e.lsb == 0:
                return f"({base} & {ex.mask(w)})"
            return f"(({base} >> {e.lsb}) & {ex.mask(w)})"
        if isinstance(e, ex.Unary):
            inner = self._emit(e.operand)
            if e.op == "!":
                return f"_b({inner} == 0)"
            w = ex.width_of(e.operand, self._width)
            if w is None:
                raise ElaborationError("cannot apply ~ to an unsized literal")
            return f"(~{inner} & {ex.mask(w)})"
        if isinstance(e, ex.Binary):
            lhs, rhs = self._emit(e.left), self._emit(e.right)
            if e.op == "&&":
                return f"_b(({lhs} != 0) & ({rhs} != 0))"
            if e.op == "||":
                return f"_b(({lhs} != 0) | ({rhs} != 0))"
            if e.op in ("==", "!="):
                return f"_b({lhs} {e.op} {rhs})"
            if e.op == "+":
                w = ex.width_of(e, self._width)
                if w is None:
                    return f"({lhs} + {rhs})"
                return f"(({lhs} + {rhs}) & {ex.mask(w)})"
            return f"({lhs} {e.op} {rhs})"
        if isinstance(e, ex.Ternary):
            return (f"_mux({self._emit(e.cond)} != 0, "
                    f"{self._emit(e.then)}, {self._emit(e.other)})")
        if isinstance(e, ex.Past):
            raise ElaborationError("$past cannot appear in synthesizable logic")
        raise TypeError(f"not an expression node: {e!r}")

    def _generate(self) -> str:
        nl = self.netlist
        lines = ["def _step(IN, REG, _zero, _b, _mux):"]
        if self.input_names:
            lines.append(f"    ({', '.join('v_' + n for n in self.input_names)},) = IN")
        if self.reg_names:
            lines.append(f"    ({', '.join('v_' + n for n in self.reg_names)},) = REG")
        driven = {a.lhs for a in nl.assigns} | set(self.reg_names) | set(self.input_names)
        for net in self.net_order:
            if net not in driven:
                lines.append(f"    v_{net} = _zero")
        for a in combinational_closure(nl):
            lines.append(f"    v_{a.lhs} = {self._emit(a.rhs)}")
        for r in nl.registers:
            nxt = self._emit(r.next)
            if r.reset is not None:
                cmp = "==" if r.reset.active_level == 1 else "!="
                nxt = f"_mux(v_{r.reset.net} {cmp} 1, {r.reset.value}, {nxt})"
            lines.append(f"    n_{r.target} = {nxt}")
        nets = ", ".join("v_" + n for n in self.net_order)
        regs = ", ".join("n_" + r for r in self.reg_names)
        lines.append(f"    return ({nets}{',' if self.net_order else ''}), "
                     f"({regs}{',' if self.reg_names else ''})")
        return "\n".join(lines) + "\n"

    @property
    def source(self) -> str:
        return self._source

    # -- execution -----------------------------------------------------------

    def step(self, inputs: tuple, regs: tuple) -> tuple[tuple, tuple]:
        return self._fn(inputs, regs, 0, int, _scalar_mux)

    def run(self, stimulus: Stimulus) -> Trace:
        values: dict[str, list[int]] = {n: [] for n in self.net_order}
        regs = self.reg_init
        for row in stimulus.inputs:
            ins = tuple(row[n] for n in self.input_names)
            nets, regs = self.step(ins, regs)
            for name, v in zip(self.net_order, nets):
                values[name].append(v)
        nl = self.netlist
        return Trace(
            design=nl.name,
            nets=self.net_order,
            widths={n: nl.nets[n].width for n in self.net_order},
            params={p.name: p.value for p in nl.params.values()},
            values=values,
            cycles=stimulus.cycles,
        )

    def run_batch(self, inputs: dict[str, np.ndarray], cycles: int) -> dict[str, np.ndarray]:
        """Simulate many stimuli at once.

        *inputs* maps input names to uint64 arrays of shape (rows, cycles)
        or (rows,) for values held constant.  Returns every net as an array
        of shape (rows, cycles).
        """
        for net in self.netlist.nets.values():
            if net.width > 64:
                raise ElaborationError(
                    f"net {net.name} is wider than 64 bits; batch simulation "
                    "is limited to 64-bit nets")
        rows = next(iter(inputs.values())).shape[0] if inputs else 1
        zero = np.zeros(rows, dtype=np.uint64)

        def col(name: str, t: int) -> np.ndarray:
            arr = inputs.get(name)
            if arr is None:
                return zero
            if arr.ndim == 1:
                return arr
            return arr[:, t]

        regs = tuple(np.full(rows, init, dtype=np.uint64) for init in self.reg_init)
        out = {n: np.empty((rows, cycles), dtype=np.uint64) for n in self.net_order}
        for t in range(cycles):
            ins = tuple(col(n, t) for n in self.input_names)
            nets, regs = self._fn(ins, regs, zero, _batch_bit, _batch_mux)
            for name, v in zip(self.net_order, nets):
                out[name][:, t] = v
        return out


def simulate(netlist: Netlist, stimulus: Stimulus) -> Trace:
    """Convenience wrapper: compile (or reuse) a kernel and run it."""
    return SimKernel(netlist).run(stimulus)


# --------------------------------------------------------------------------
# VCD dump

def write_vcd(trace: Trace, path: str | Path, timescale: str = "1ns") -> None:
    """Dump a trace as VCD text, one timestep per simulation cycle."""
    ids: dict[str, str] = {}
    alphabet = "".join(chr(c) for c in range(33, 127))
    for i, net in enumerate(trace.nets):
        code = ""
        k = i
        while True:
            code = alphabet[k % len(alphabet)] + code
            k = k // len(alphabet) - 1
            if k < 0:
                break
        ids[net] = code
    lines = [f"$timescale {timescale} $end", f"$scope module {trace.design} $end"]
    for net in trace.nets:
        lines.append(f"$var wire {trace.widths[net]} {ids[net]} {net} $end")
    lines.append("$upscope $end")
    lines.append("$enddefinitions $end")
    last: dict[str, int | None] = {n: None for n in trace.nets}
    for t in range(trace.cycles):
        lines.append(f"#{t}")
        for net in trace.nets:
            v = trace.values[net][t]
            if v != last[net]:
                last[net] = v
                if trace.widths[net] == 1:
                    lines.append(f"{v}{ids[net]}")
                else:
                    lines.append(f"b{v:b} {ids[net]}")
    lines.append(f"#{trace.cycles}")
    Path(path).write_text("\n".join(lines) + "\n")
