"""Source generator for LCEQ entities whose paths carry different data types.

The synthesizable part of a generated entity is one shift-register delay
line per path, sized by ``lateq_read_delays(LEQ_ID, path)`` at elaboration.
Everything touching time markers sits between ``--pragma translate_off`` and
``--pragma translate_on`` and relies on the support package ``lateq_pkg``
(shipped as ``latbal/data/lateq_pkg.vhd``).

Type names must start with ``T_``; each needs an initial-value constant named
``C_<rest>_INIT`` (see :func:`init_constant_name`).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

from .analyzer import is_vhdl_identifier

__all__ = [
    "BadTypeName",
    "SpecError",
    "LceqSpec",
    "MARKER_FIELD",
    "MARKER_IDENTIFIERS",
    "init_constant_name",
    "generate_lceq",
    "strip_translate_off",
    "marker_references",
    "support_package_source",
]

TRANSLATE_OFF = "--pragma translate_off"
TRANSLATE_ON = "--pragma translate_on"

MARKER_FIELD = "mrk"

# Identifiers that must never reach synthesis.
MARKER_IDENTIFIERS = (
    "lateq_pkg",
    "lateq_report_delay",
    "lateq_report_end",
    "lateq_mrk_cmp",
    "LATEQ_ANALYSIS",
    "T_LATEQ_MRK",
    "tm_min",
    MARKER_FIELD,
)


class BadTypeName(ValueError):
    pass


class SpecError(ValueError):
    pass


def init_constant_name(type_name: str) -> str:
    if not type_name.startswith("T_") or len(type_name) < 3:
        raise BadTypeName(f"type name {type_name!r} must start with 'T_'")
    return "C_" + type_name[2:] + "_INIT"


@dataclass(frozen=True)
class LceqSpec:
    entity_name: str
    type_names: tuple[str, ...]
    use_clauses: tuple[str, ...] = ()
    read_package: str = "lateq_read_pkg"
    read_function: str = "lateq_read_delays"

    def __post_init__(self) -> None:
        object.__setattr__(self, "type_names", tuple(self.type_names))
        object.__setattr__(self, "use_clauses", tuple(self.use_clauses))

    @property
    def n_paths(self) -> int:
        return len(self.type_names)

    def check(self) -> None:
        for name in (self.entity_name, self.read_package, self.read_function):
            if not is_vhdl_identifier(name):
                raise SpecError(f"{name!r} is not a VHDL basic identifier")
        for t in self.type_names:
            init_constant_name(t)
            if not is_vhdl_identifier(t):
                raise BadTypeName(f"type name {t!r} is not a VHDL basic identifier")
        if self.n_paths < 2:
            raise SpecError(f"an LCEQ block needs at least 2 paths, got {self.n_paths}")
        for u in self.use_clauses:
            if not re.fullmatch(r"[A-Za-z]\w*(\.[A-Za-z]\w*)*(\.all)?", u):
                raise SpecError(f"bad use clause {u!r}")


def _port_block(spec: LceqSpec) -> list[str]:
    ports = [("clk", "in ", "std_logic")]
    ports += [(f"din{i}", "in ", t) for i, t in enumerate(spec.type_names)]
    ports += [(f"dout{i}", "out", t) for i, t in enumerate(spec.type_names)]
    width = max(len(p[0]) for p in ports)
    lines = [f"    {name.ljust(width)} : {mode} {typ};" for name, mode, typ in ports]
    lines[-1] = lines[-1][:-1] + ");"
    return lines


def generate_lceq(spec: LceqSpec) -> str:
    spec.check()
    n = spec.n_paths
    ent = spec.entity_name
    rd = spec.read_function
    paths = list(enumerate(spec.type_names))
    out_of = [f"del{i}(C_DEL{i})" for i in range(n)]

    o: list[str] = [
        f"-- {ent}: latency checking and equalizing block, {n} paths.",
        "-- Generated by latbal lateqgen.  Do not edit.",
        f"-- Path types: {', '.join(spec.type_names)}",
        "library ieee;",
        "use ieee.std_logic_1164.all;",
        "library work;",
        f"use work.{spec.read_package}.all;",
        *(f"use {u};" for u in spec.use_clauses),
        TRANSLATE_OFF,
        "use work.lateq_pkg.all;",
        TRANSLATE_ON,
        "",
        f"entity {ent} is",
        "  generic (",
        "    LEQ_ID : string);",
        "  port (",
        *_port_block(spec),
        f"end entity {ent};",
        "",
        f"architecture generated of {ent} is",
        "",
    ]
    for i, t in paths:
        o += [
            f"  constant C_DEL{i} : integer := {rd}(LEQ_ID, {i});",
            f"  type T_DEL{i} is array (0 to C_DEL{i}) of {t};",
            f"  signal del{i} : T_DEL{i} := (others => {init_constant_name(t)});",
            "",
        ]
    o.append("begin")
    for i, _ in paths:
        o += [
            "",
            f"  del{i}(0) <= din{i};",
            f"  g_del{i} : if C_DEL{i} > 0 generate",
            f"    p_del{i} : process (clk) is",
            "    begin",
            "      if rising_edge(clk) then",
            f"        del{i}(1 to C_DEL{i}) <= del{i}(0 to C_DEL{i} - 1);",
            "      end if;",
            f"    end process p_del{i};",
            f"  end generate g_del{i};",
        ]

    o += ["", f"  p_out : process ({', '.join(f'del{i}' for i in range(n))}) is"]
    o += [f"    variable v{i} : {t};" for i, t in paths]
    o += [
        f"    {TRANSLATE_OFF}",
        "    variable tm_min : T_LATEQ_MRK;",
        f"    {TRANSLATE_ON}",
        "  begin",
    ]
    o += [f"    v{i} := {out_of[i]};" for i in range(n)]
    o += [
        f"    {TRANSLATE_OFF}",
        "    -- analysis mode: forward the oldest marker on every output",
        "    if LATEQ_ANALYSIS then",
        f"      tm_min := v0.{MARKER_FIELD};",
    ]
    for i in range(1, n):
        o.append(f"      if lateq_mrk_cmp(v{i}.{MARKER_FIELD}, tm_min) < 0 then "
                 f"tm_min := v{i}.{MARKER_FIELD}; end if;")
    o += [f"      v{i}.{MARKER_FIELD} := tm_min;" for i in range(n)]
    o += ["    end if;", f"    {TRANSLATE_ON}"]
    o += [f"    dout{i} <= v{i};" for i in range(n)]
    o += ["  end process p_out;", ""]

    o += [
        TRANSLATE_OFF,
        "  p_check : process (clk) is",
        "  begin",
        "    if rising_edge(clk) then",
        "      if LATEQ_ANALYSIS then",
    ]
    o += [f"        lateq_report_delay(LEQ_ID, {i}, {out_of[i]}.{MARKER_FIELD});" for i in range(n)]
    o.append("        lateq_report_end(LEQ_ID);")
    cmps = [f"lateq_mrk_cmp({out_of[i]}.{MARKER_FIELD}, {out_of[0]}.{MARKER_FIELD}) /= 0"
            for i in range(1, n)]
    o.append(f"      elsif {cmps[0]}")
    o += [f"         or {c}" for c in cmps[1:]]
    o[-1] += " then"
    o.append('        report LEQ_ID & " inequal latencies:"')
    for i in range(n):
        sep = " out" if i == 0 else ", out"
        o.append(f'          & "{sep}{i}=" & integer\'image({out_of[i]}.{MARKER_FIELD})')
    o += [
        "          severity failure;",
        "      end if;",
        "    end if;",
        "  end process p_check;",
        TRANSLATE_ON,
        "",
        "end architecture generated;",
    ]
    return "\n".join(o) + "\n"


_OFF = re.compile(r"--\s*(?:pragma|synthesis)\s+translate_off\b", re.I)
_ON = re.compile(r"--\s*(?:pragma|synthesis)\s+translate_on\b", re.I)


def strip_translate_off(text: str) -> str:
    """Drop every line from a translate_off metacomment through its translate_on."""
    kept: list[str] = []
    off = False
    for line in text.splitlines(keepends=True):
        if not off and _OFF.search(line):
            off = True
        elif off and _ON.search(line):
            off = False
        elif not off:
            kept.append(line)
    if off:
        raise ValueError("unterminated translate_off region")
    return "".join(kept)


def marker_references(text: str) -> list[str]:
    """Marker-related identifiers occurring in ``text`` (case-insensitive, whole words)."""
    found = []
    for ident in MARKER_IDENTIFIERS:
        if re.search(rf"(?<![\w]){re.escape(ident)}(?![\w])", text, re.I):
            found.append(ident)
    return found


def support_package_source() -> str:
    return resources.files("latbal").joinpath("data/lateq_pkg.vhd").read_text(encoding="utf-8")
