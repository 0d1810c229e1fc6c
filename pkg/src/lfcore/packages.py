"""Package identity and the set of loaded packages.

Packages reference each other by name; the dependency graph is inferred
from the qualified names appearing in a package and must be acyclic.
"""

from __future__ import annotations

import dataclasses
import hashlib
from graphlib import CycleError, TopologicalSorter

from .ast import Module, Package, QualifiedName, RecordDef, TemplateDef, ValueDef, VariantDef
from .errors import LfTypeError


def hash_package(pkg: Package) -> str:
    """SHA-256 of the canonical text, lowercase hex."""
    from .parser import pretty_package

    return hashlib.sha256(pretty_package(pkg).encode("utf-8")).hexdigest()


def iter_refs(node):
    """Yield every QualifiedName reachable from an AST node."""
    stack = [node]
    while stack:
        n = stack.pop()
        if isinstance(n, QualifiedName):
            yield n
        elif isinstance(n, (tuple, list)):
            stack.extend(n)
        elif dataclasses.is_dataclass(n) and not isinstance(n, type):
            for f in dataclasses.fields(n):
                if f.name != "span":
                    stack.append(getattr(n, f.name))


def dependencies(pkg: Package) -> set[str]:
    return {r.package for r in iter_refs(pkg.modules) if r.package and r.package != pkg.name}


def load_order(pkgs: list[Package]) -> list[Package]:
    """Topological order, dependencies first; ties broken by name."""
    by_name: dict[str, Package] = {}
    for p in pkgs:
        if p.name in by_name:
            raise LfTypeError(f"package {p.name} loaded twice", p.span, "DuplicatePackage")
        by_name[p.name] = p
    sorter = TopologicalSorter({n: dependencies(p) & set(by_name) for n, p in sorted(by_name.items())})
    try:
        sorter.prepare()
    except CycleError as e:
        cycle = " -> ".join(e.args[1])
        raise LfTypeError(f"cyclic package dependency: {cycle}", None, "CyclicPackageDependency") from None
    order = []
    while sorter.is_active():
        ready = sorted(sorter.get_ready())
        order.extend(by_name[n] for n in ready)
        sorter.done(*ready)
    return order


class World:
    """Lookup tables over a set of packages."""

    def __init__(self, packages=()):
        self.packages: dict[str, Package] = {}
        self._defs: dict[QualifiedName, object] = {}
        self._templates: dict[QualifiedName, TemplateDef] = {}
        for p in packages:
            self.add(p)

    def add(self, pkg: Package) -> None:
        if pkg.name in self.packages:
            raise LfTypeError(f"package {pkg.name} loaded twice", pkg.span, "DuplicatePackage")
        self.packages[pkg.name] = pkg
        for m in pkg.modules:
            for d in (*m.records, *m.variants, *m.values):
                self._defs[QualifiedName(pkg.name, m.name, d.name)] = d
            for t in m.templates:
                self._templates[QualifiedName(pkg.name, m.name, t.name)] = t

    def extended(self, pkg: Package) -> World:
        w = World()
        w.packages = dict(self.packages)
        w._defs = dict(self._defs)
        w._templates = dict(self._templates)
        w.add(pkg)
        return w

    def record(self, ref: QualifiedName) -> RecordDef | None:
        d = self._defs.get(ref)
        return d if isinstance(d, RecordDef) else None

    def variant(self, ref: QualifiedName) -> VariantDef | None:
        d = self._defs.get(ref)
        return d if isinstance(d, VariantDef) else None

    def type_def(self, ref: QualifiedName) -> RecordDef | VariantDef | None:
        d = self._defs.get(ref)
        return d if isinstance(d, (RecordDef, VariantDef)) else None

    def value(self, ref: QualifiedName) -> ValueDef | None:
        d = self._defs.get(ref)
        return d if isinstance(d, ValueDef) else None

    def template(self, ref: QualifiedName) -> TemplateDef | None:
        return self._templates.get(ref)

    def templates(self) -> dict[QualifiedName, TemplateDef]:
        return dict(self._templates)

    def module(self, package: str, name: str) -> Module | None:
        p = self.packages.get(package)
        return p.module(name) if p else None

    def resolve(self, ref: QualifiedName) -> QualifiedName:
        """Fill in the package of a scenario reference by module name."""
        if ref.package is not None:
            return ref
        hits = [n for n, p in sorted(self.packages.items()) if p.module(ref.module) is not None]
        if len(hits) != 1:
            why = "no" if not hits else "more than one"
            raise LfTypeError(f"{why} loaded package defines module {ref.module}", None, "UnknownRef")
        return QualifiedName(hits[0], ref.module, ref.name)


def map_refs(node, f):
    """Rebuild an AST with every QualifiedName replaced by ``f(name)``."""
    if isinstance(node, QualifiedName):
        return f(node)
    if isinstance(node, tuple):
        return tuple(map_refs(n, f) for n in node)
    if dataclasses.is_dataclass(node) and not isinstance(node, type):
        changes = {}
        for fld in dataclasses.fields(node):
            if fld.name == "span":
                continue
            old = getattr(node, fld.name)
            new = map_refs(old, f)
            if new is not old:
                changes[fld.name] = new
        return dataclasses.replace(node, **changes) if changes else node
    return node
