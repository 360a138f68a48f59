"""STRIPS subset of PDDL: parsing, grounding, state transitions and plan validation.

Supported: ``:strips``, ``:typing``, ``:action-costs`` with constant
``(increase (total-cost) k)`` effects, ``:constants``, conjunctive positive
preconditions, add and delete effects. Negative conditions are expressed
with complementary fluents (``loaded`` / ``not-loaded``).

States are Python ints used as bitsets over the task's fluent universe.
A plan is a tuple of ground action ids; the virtual start action a0 is
implicit and never stored.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

Fluent = tuple  # (predicate, arg1, arg2, ...)
State = int
Plan = tuple

SUPPORTED_REQUIREMENTS = frozenset({":strips", ":typing", ":action-costs"})


class PDDLError(Exception):
    pass


class PDDLSyntaxError(PDDLError):
    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        where = f"line {line}, col {col}: " if line is not None else ""
        super().__init__(where + message)


class GroundingError(PDDLError):
    pass


class InapplicableActionError(PDDLError):
    pass


# -- s-expressions ------------------------------------------------------------

class Atom(str):
    line: int = 0
    col: int = 0


class SList(list):
    line: int = 0
    col: int = 0


def _atom(text, line, col):
    a = Atom(text.lower())
    a.line, a.col = line, col
    return a


def parse_sexpr(text: str) -> list:
    """Read every top-level s-expression in ``text``."""
    stack: list[SList] = []
    top: list = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line, col = line + 1, 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "(":
            lst = SList()
            lst.line, lst.col = line, col
            stack.append(lst)
            i += 1
            col += 1
            continue
        if ch == ")":
            if not stack:
                raise PDDLSyntaxError("unbalanced ')'", line, col)
            done = stack.pop()
            (stack[-1] if stack else top).append(done)
            i += 1
            col += 1
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in "();":
            j += 1
        (stack[-1] if stack else top).append(_atom(text[i:j], line, col))
        col += j - i
        i = j
    if stack:
        raise PDDLSyntaxError("unclosed '('", stack[-1].line, stack[-1].col)
    return top


def _pos(node):
    return getattr(node, "line", None), getattr(node, "col", None)


def _expect_list(node, what):
    if not isinstance(node, list):
        raise PDDLSyntaxError(f"expected {what}", *_pos(node))
    return node


def _expect_atom(node, what):
    if isinstance(node, list):
        raise PDDLSyntaxError(f"expected {what}", *_pos(node))
    return node


def _typed_list(items) -> list[tuple[str, str]]:
    """``a b - t c`` -> [(a, t), (b, t), (c, object)]."""
    out: list[tuple[str, str]] = []
    pending: list[str] = []
    it = iter(items)
    for tok in it:
        _expect_atom(tok, "name in typed list")
        if tok == "-":
            try:
                typ = next(it)
            except StopIteration:
                raise PDDLSyntaxError("missing type after '-'", *_pos(tok)) from None
            if isinstance(typ, list):
                raise PDDLSyntaxError("'either' types are not supported", *_pos(typ))
            out.extend((p, str(typ)) for p in pending)
            pending = []
        else:
            pending.append(str(tok))
    out.extend((p, "object") for p in pending)
    return out


# -- domain model ---------------------------------------------------------------

@dataclass(frozen=True)
class ActionSchema:
    name: str
    parameters: tuple  # ((var, type), ...)
    precondition: tuple  # atoms over variables/constants
    add: tuple
    delete: tuple
    cost: float = 1.0


@dataclass(frozen=True)
class DomainModel:
    name: str
    requirements: frozenset = frozenset()
    types: dict = field(default_factory=dict)  # type -> parent
    constants: dict = field(default_factory=dict)  # name -> type
    predicates: dict = field(default_factory=dict)  # name -> (param types)
    actions: tuple = ()

    def schema(self, name: str) -> ActionSchema:
        for a in self.actions:
            if a.name == name:
                return a
        raise KeyError(name)

    def is_subtype(self, typ: str, ancestor: str) -> bool:
        seen = set()
        while typ not in seen:
            if typ == ancestor:
                return True
            seen.add(typ)
            if typ == "object":
                return False
            typ = self.types.get(typ, "object")
        return False


@dataclass(frozen=True)
class ProblemInstance:
    name: str
    domain_name: str
    objects: dict  # name -> type, declaration order preserved
    init: frozenset
    goal: frozenset


def _parse_literal(node, variables, domain_preds, constants, where):
    lst = _expect_list(node, "atom")
    if not lst:
        raise PDDLSyntaxError("empty atom", *_pos(node))
    pred = str(_expect_atom(lst[0], "predicate name"))
    args = tuple(str(_expect_atom(a, "argument")) for a in lst[1:])
    if pred not in domain_preds:
        raise PDDLSyntaxError(f"undeclared predicate '{pred}' in {where}", *_pos(node))
    if len(args) != len(domain_preds[pred]):
        raise PDDLSyntaxError(
            f"arity mismatch for '{pred}' in {where}: expected "
            f"{len(domain_preds[pred])}, got {len(args)}", *_pos(node))
    for a in args:
        if a.startswith("?"):
            if a not in variables:
                raise PDDLSyntaxError(f"unknown variable '{a}' in {where}", *_pos(node))
        elif a not in constants:
            raise PDDLSyntaxError(f"unknown constant '{a}' in {where}", *_pos(node))
    return (pred,) + args


def _conjuncts(node):
    if isinstance(node, list) and node and node[0] == "and":
        return list(node[1:])
    if isinstance(node, list) and not node:
        return []
    return [node]


def _parse_action(items, preds, constants, types):
    name = str(_expect_atom(items[1], "action name"))
    params: list = []
    pre: list = []
    add: list = []
    dele: list = []
    cost = None
    rest = items[2:]
    if len(rest) % 2:
        raise PDDLSyntaxError(f"malformed action '{name}'", *_pos(items))
    for key, val in zip(rest[::2], rest[1::2]):
        if key == ":parameters":
            params = _typed_list(_expect_list(val, "parameter list"))
            for _, t in params:
                if t != "object" and t not in types:
                    raise PDDLSyntaxError(f"unknown type '{t}' in action '{name}'", *_pos(val))
        elif key == ":precondition":
            variables = {p for p, _ in params}
            for lit in _conjuncts(val):
                if isinstance(lit, list) and lit and lit[0] in ("not", "or", "imply", "forall", "exists", "when"):
                    raise PDDLSyntaxError(f"'{lit[0]}' in preconditions is not supported", *_pos(lit))
                pre.append(_parse_literal(lit, variables, preds, constants, f"action '{name}'"))
        elif key == ":effect":
            variables = {p for p, _ in params}
            for lit in _conjuncts(val):
                lst = _expect_list(lit, "effect")
                head = lst[0] if lst else None
                if head == "not":
                    dele.append(_parse_literal(lst[1], variables, preds, constants, f"action '{name}'"))
                elif head == "increase":
                    target = lst[1]
                    if not (isinstance(target, list) and target == ["total-cost"]):
                        raise PDDLSyntaxError("only (increase (total-cost) k) is supported", *_pos(lst))
                    try:
                        k = float(_expect_atom(lst[2], "cost constant"))
                    except ValueError:
                        raise PDDLSyntaxError("cost increment must be a constant", *_pos(lst)) from None
                    if k < 0:
                        raise PDDLSyntaxError("negative action cost", *_pos(lst))
                    cost = (cost or 0.0) + k
                elif head in ("when", "forall", "decrease", "assign"):
                    raise PDDLSyntaxError(f"'{head}' effects are not supported", *_pos(lst))
                else:
                    add.append(_parse_literal(lst, variables, preds, constants, f"action '{name}'"))
        else:
            raise PDDLSyntaxError(f"unknown action field '{key}'", *_pos(key))
    return ActionSchema(name, tuple(params), tuple(pre), tuple(add), tuple(dele),
                        1.0 if cost is None else cost)


def parse_domain(text: str) -> DomainModel:
    """Parse a domain file in the supported STRIPS subset."""
    exprs = parse_sexpr(text)
    if len(exprs) != 1 or not isinstance(exprs[0], list) or not exprs[0] or exprs[0][0] != "define":
        raise PDDLSyntaxError("expected a single (define (domain ...)) form", 1, 1)
    body = exprs[0]
    header = _expect_list(body[1] if len(body) > 1 else None, "(domain name)")
    if len(header) != 2 or header[0] != "domain":
        raise PDDLSyntaxError("expected (domain name)", *_pos(header))
    name = str(header[1])
    requirements: set = set()
    types: dict = {}
    constants: dict = {}
    preds: dict = {}
    actions = []
    for section in body[2:]:
        sec = _expect_list(section, "domain section")
        key = sec[0] if sec else None
        if key == ":requirements":
            for r in sec[1:]:
                if r not in SUPPORTED_REQUIREMENTS:
                    raise PDDLSyntaxError(f"unsupported requirement '{r}'", *_pos(r))
                requirements.add(str(r))
        elif key == ":types":
            for t, parent in _typed_list(sec[1:]):
                types[t] = parent
        elif key == ":constants":
            for c, t in _typed_list(sec[1:]):
                constants[c] = t
        elif key == ":predicates":
            for p in sec[1:]:
                p = _expect_list(p, "predicate declaration")
                pname = str(_expect_atom(p[0], "predicate name"))
                if pname in preds:
                    raise PDDLSyntaxError(f"duplicate predicate '{pname}'", *_pos(p))
                preds[pname] = tuple(t for _, t in _typed_list(p[1:]))
        elif key == ":functions":
            for f in sec[1:]:
                if isinstance(f, list) and f != ["total-cost"]:
                    raise PDDLSyntaxError("only (total-cost) functions are supported", *_pos(f))
        elif key == ":action":
            actions.append(_parse_action(sec, preds, constants, types))
        else:
            raise PDDLSyntaxError(f"unsupported domain section '{key}'", *_pos(sec))
    for t, parent in list(types.items()):
        if parent != "object" and parent not in types:
            types[parent] = "object"
    names = [a.name for a in actions]
    if len(set(names)) != len(names):
        raise PDDLSyntaxError("duplicate action schema names", 1, 1)
    return DomainModel(name, frozenset(requirements), types, constants, preds, tuple(actions))


def parse_problem(text: str, domain: DomainModel | None = None) -> ProblemInstance:
    exprs = parse_sexpr(text)
    if len(exprs) != 1 or not isinstance(exprs[0], list) or not exprs[0] or exprs[0][0] != "define":
        raise PDDLSyntaxError("expected a single (define (problem ...)) form", 1, 1)
    body = exprs[0]
    header = _expect_list(body[1], "(problem name)")
    name = str(header[1])
    domain_name = ""
    objects: dict = {}
    init: set = set()
    goal: set = set()
    for section in body[2:]:
        sec = _expect_list(section, "problem section")
        key = sec[0] if sec else None
        if key == ":domain":
            domain_name = str(sec[1])
        elif key == ":objects":
            for o, t in _typed_list(sec[1:]):
                objects[o] = t
        elif key == ":init":
            for lit in sec[1:]:
                lst = _expect_list(lit, "init atom")
                if lst and lst[0] == "=":
                    continue  # (= (total-cost) 0)
                init.add(tuple(str(_expect_atom(x, "init atom")) for x in lst))
        elif key == ":goal":
            for lit in _conjuncts(sec[1]):
                lst = _expect_list(lit, "goal atom")
                if lst and lst[0] in ("not", "or", "forall", "exists", "imply"):
                    raise PDDLSyntaxError(f"'{lst[0]}' goals are not supported", *_pos(lst))
                goal.add(tuple(str(_expect_atom(x, "goal atom")) for x in lst))
        elif key == ":metric":
            continue
        else:
            raise PDDLSyntaxError(f"unsupported problem section '{key}'", *_pos(sec))
    if domain is not None and domain_name and domain_name != domain.name:
        raise PDDLError(f"problem is for domain '{domain_name}', not '{domain.name}'")
    return ProblemInstance(name, domain_name, objects, frozenset(init), frozenset(goal))


# -- grounding -----------------------------------------------------------------

@dataclass(frozen=True)
class GroundAction:
    id: int
    name: str
    args: tuple
    pre: int
    add: int
    delete: int
    cost: float = 1.0

    def __str__(self):
        return "(" + " ".join((self.name,) + self.args) + ")"


@dataclass(frozen=True, eq=False)
class GroundTask:
    """Grounded STRIPS task. Immutable; safe to share between threads."""

    fluents: tuple  # index -> Fluent
    actions: tuple  # index == action id
    init: int
    goal: int
    name: str = ""

    @cached_property
    def fluent_index(self) -> dict:
        return {f: i for i, f in enumerate(self.fluents)}

    @cached_property
    def action_index(self) -> dict:
        return {(a.name,) + a.args: a.id for a in self.actions}

    @cached_property
    def achievers(self) -> tuple:
        out = [[] for _ in self.fluents]
        for a in self.actions:
            for f in iter_bits(a.add):
                out[f].append(a.id)
        return tuple(tuple(x) for x in out)

    @cached_property
    def consumers(self) -> tuple:
        out = [[] for _ in self.fluents]
        for a in self.actions:
            for f in iter_bits(a.pre):
                out[f].append(a.id)
        return tuple(tuple(x) for x in out)

    @cached_property
    def unit_cost(self) -> bool:
        return all(a.cost == 1 for a in self.actions)

    @cached_property
    def relevant_mask(self) -> int:
        """Fluents that some precondition or the goal mentions."""
        mask = self.goal
        for a in self.actions:
            mask |= a.pre
        return mask

    def state(self, fluents) -> int:
        s = 0
        for f in fluents:
            s |= 1 << self.fluent_index[tuple(f)]
        return s

    def fluents_of(self, s: int) -> list:
        return [self.fluents[i] for i in iter_bits(s)]

    def is_goal(self, s: int) -> bool:
        return self.goal & ~s == 0

    @cached_property
    def _successor_index(self):
        # key each action on its least-shared precondition fluent
        by_fluent: dict = {}
        unconditional = []
        for a in self.actions:
            pre = list(iter_bits(a.pre))
            if not pre:
                unconditional.append(a.id)
                continue
            key = min(pre, key=lambda f: (len(self.consumers[f]), f))
            by_fluent.setdefault(key, []).append(a.id)
        return {f: tuple(v) for f, v in by_fluent.items()}, tuple(unconditional)

    def applicable(self, s: int) -> list:
        """Ids of actions applicable in ``s``, ascending."""
        index, out = self._successor_index
        out = list(out)
        acts = self.actions
        for f in iter_bits(s):
            for a in index.get(f, ()):
                if acts[a].pre & ~s == 0:
                    out.append(a)
        out.sort()
        return out

    @cached_property
    def add_lists(self) -> tuple:
        return tuple(tuple(iter_bits(a.add)) for a in self.actions)

    @cached_property
    def pre_lists(self) -> tuple:
        return tuple(tuple(iter_bits(a.pre)) for a in self.actions)

    @cached_property
    def pre_counts(self) -> tuple:
        return tuple(bin(a.pre).count("1") for a in self.actions)

    def lookup(self, name: str, *args: str) -> int:
        return self.action_index[(name,) + tuple(args)]

    def with_goal(self, goal_fluents) -> "GroundTask":
        """Same task with a different goal drawn from this fluent universe."""
        idx = self.fluent_index
        missing = [f for f in goal_fluents if tuple(f) not in idx]
        if missing:
            raise GroundingError(f"goal fluent outside fluent universe: {missing[0]}")
        return GroundTask(self.fluents, self.actions, self.init, self.state(goal_fluents), self.name)


_BYTE_BITS = tuple(tuple(i for i in range(8) if b >> i & 1) for b in range(256))


def iter_bits(mask: int) -> list:
    """Ascending indices of the set bits of ``mask``."""
    if mask < 256:
        return list(_BYTE_BITS[mask])
    out = []
    for k, b in enumerate(mask.to_bytes((mask.bit_length() + 7) // 8, "little")):
        if b:
            base = 8 * k
            out.extend(base + i for i in _BYTE_BITS[b])
    return out


def fluent_str(f) -> str:
    return "(" + " ".join(f) + ")"


def _objects_by_type(domain: DomainModel, objects: dict) -> dict:
    universe = dict(domain.constants)
    universe.update(objects)
    by_type: dict = {}
    for obj, typ in universe.items():
        if typ != "object" and typ not in domain.types:
            raise GroundingError(f"object '{obj}' has undeclared type '{typ}'")
    for t in list(domain.types) + ["object"]:
        by_type[t] = [o for o, ot in universe.items() if domain.is_subtype(ot, t)]
    return by_type


def _check_atom_types(domain, atom, universe, where):
    pred, args = atom[0], atom[1:]
    if pred not in domain.predicates:
        raise GroundingError(f"undeclared predicate '{pred}' in {where}")
    sig = domain.predicates[pred]
    if len(sig) != len(args):
        raise GroundingError(f"arity mismatch for '{pred}' in {where}")
    for a, t in zip(args, sig):
        if a not in universe:
            raise GroundingError(f"unknown object '{a}' in {where}")
        if not domain.is_subtype(universe[a], t):
            raise GroundingError(f"type mismatch: '{a}' is not a '{t}' in {fluent_str(atom)} ({where})")


def ground(domain: DomainModel, problem: ProblemInstance) -> GroundTask:
    """Instantiate every schema over type-consistent objects.

    Static predicates (never in an add or delete list) are evaluated at
    grounding time and compiled away. Remaining instantiations are pruned
    to those reachable from the initial state under delete relaxation.
    Action ids follow schema order, then object declaration order.
    """
    universe = dict(domain.constants)
    universe.update(problem.objects)
    for atom in problem.init:
        _check_atom_types(domain, atom, universe, "init")
    for atom in problem.goal:
        try:
            _check_atom_types(domain, atom, universe, "goal")
        except GroundingError as e:
            raise GroundingError(f"goal fluent outside fluent universe: {e}") from None
    by_type = _objects_by_type(domain, problem.objects)

    dynamic = set()
    for s in domain.actions:
        dynamic.update(a[0] for a in s.add)
        dynamic.update(a[0] for a in s.delete)
    static_true = {a for a in problem.init if a[0] not in dynamic}

    candidates = []
    for schema in domain.actions:
        variables = [v for v, _ in schema.parameters]
        domains = [by_type.get(t, []) for _, t in schema.parameters]
        static_pre = [a for a in schema.precondition if a[0] not in dynamic]
        # check each static atom as soon as its last variable is bound
        checks: list[list] = [[] for _ in variables]
        for atom in static_pre:
            pos = [variables.index(x) for x in atom[1:] if x.startswith("?")]
            if variables:
                checks[max(pos) if pos else 0].append(atom)
        if not variables:
            if all(a in static_true for a in static_pre):
                candidates.append((schema, ()))
            continue
        binding: dict = {}

        def subst(atom):
            return (atom[0],) + tuple(binding.get(x, x) for x in atom[1:])

        def rec(k):
            if k == len(variables):
                candidates.append((schema, tuple(binding[v] for v in variables)))
                return
            for obj in domains[k]:
                binding[variables[k]] = obj
                if all(subst(a) in static_true for a in checks[k]):
                    rec(k + 1)
            binding.pop(variables[k], None)

        rec(0)

    # relaxed reachability over the dynamic part
    inst = []
    for schema, args in candidates:
        b = dict(zip((v for v, _ in schema.parameters), args))

        def sub(atom, b=b):
            return (atom[0],) + tuple(b.get(x, x) for x in atom[1:])

        pre = frozenset(sub(a) for a in schema.precondition if a[0] in dynamic)
        add = frozenset(sub(a) for a in schema.add)
        dele = frozenset(sub(a) for a in schema.delete) - add
        inst.append((schema, args, pre, add, dele))

    reached = {a for a in problem.init if a[0] in dynamic}
    alive = [False] * len(inst)
    changed = True
    while changed:
        changed = False
        for k, (_, _, pre, add, _) in enumerate(inst):
            if not alive[k] and pre <= reached:
                alive[k] = True
                if not add <= reached:
                    reached |= add
                    changed = True

    kept = [x for k, x in enumerate(inst) if alive[k]]
    goal_dynamic = {g for g in problem.goal if g[0] in dynamic}
    goal_static_false = {g for g in problem.goal if g[0] not in dynamic and g not in static_true}
    universe_fluents = set(a for a in problem.init if a[0] in dynamic)
    for _, _, pre, add, dele in kept:
        universe_fluents |= pre | add | dele
    universe_fluents |= goal_dynamic | goal_static_false
    fluents = tuple(sorted(universe_fluents))
    index = {f: i for i, f in enumerate(fluents)}

    def mask(fs):
        m = 0
        for f in fs:
            m |= 1 << index[f]
        return m

    actions = tuple(
        GroundAction(i, schema.name, args, mask(pre), mask(add), mask(dele), schema.cost)
        for i, (schema, args, pre, add, dele) in enumerate(kept)
    )
    return GroundTask(
        fluents=fluents,
        actions=actions,
        init=mask(a for a in problem.init if a[0] in dynamic),
        goal=mask(goal_dynamic | goal_static_false),
        name=problem.name,
    )


# -- semantics -------------------------------------------------------------------

def apply(task: GroundTask, s: int, a: int) -> int:
    act = task.actions[a]
    if act.pre & ~s:
        missing = [fluent_str(f) for f in task.fluents_of(act.pre & ~s)]
        raise InapplicableActionError(f"{act} is not applicable: missing {', '.join(missing)}")
    return (s & ~act.delete) | act.add


@dataclass
class ValidationReport:
    valid: bool
    goal_reached: bool
    cost: float
    failed_index: int | None = None  # 1-based position a_i of the first inapplicable action
    message: str = ""
    states: list = field(default_factory=list)  # s_0 .. s_k actually reached


def validate_plan(task: GroundTask, plan) -> ValidationReport:
    s = task.init
    states = [s]
    cost = 0.0
    for i, a in enumerate(plan, start=1):
        if not 0 <= a < len(task.actions):
            return ValidationReport(False, False, cost, i, f"unknown action id {a}", states)
        act = task.actions[a]
        if act.pre & ~s:
            missing = ", ".join(fluent_str(f) for f in task.fluents_of(act.pre & ~s))
            return ValidationReport(False, False, cost, i, f"a_{i} {act} not applicable: missing {missing}", states)
        s = (s & ~act.delete) | act.add
        cost += act.cost
        states.append(s)
    reached = task.is_goal(s)
    msg = "" if reached else "goal not reached: missing " + ", ".join(
        fluent_str(f) for f in task.fluents_of(task.goal & ~s))
    return ValidationReport(reached, reached, cost, None, msg, states)


def simulate(task: GroundTask, plan) -> list:
    """States s_0..s_N visited by ``plan``; raises on an inapplicable step."""
    s = task.init
    out = [s]
    for a in plan:
        s = apply(task, s, a)
        out.append(s)
    return out


# -- plan text ---------------------------------------------------------------------

def format_plan(task: GroundTask, plan) -> str:
    return "".join(str(task.actions[a]) + "\n" for a in plan)


def parse_plan(task: GroundTask, text: str) -> Plan:
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(";"):
            continue
        if not (line.startswith("(") and line.endswith(")")):
            raise PDDLSyntaxError(f"malformed plan step '{line}'", lineno, 1)
        key = tuple(line[1:-1].lower().split())
        if key not in task.action_index:
            raise PDDLError(f"line {lineno}: unknown ground action {line}")
        out.append(task.action_index[key])
    return tuple(out)


def action_from_string(task: GroundTask, text: str) -> int:
    key = tuple(text.strip().strip("()").lower().split())
    return task.action_index[key]


def domain_to_pddl(domain: DomainModel) -> str:
    """Render a DomainModel back to PDDL text (parse round-trips it)."""
    def typed(pairs):
        return " ".join(f"{n} - {t}" for n, t in pairs)

    def atom(a):
        return "(" + " ".join(a) + ")"

    lines = [f"(define (domain {domain.name})"]
    if domain.requirements:
        lines.append("  (:requirements " + " ".join(sorted(domain.requirements)) + ")")
    if domain.types:
        lines.append("  (:types " + typed(domain.types.items()) + ")")
    if domain.constants:
        lines.append("  (:constants " + typed(domain.constants.items()) + ")")
    lines.append("  (:predicates")
    for p, sig in domain.predicates.items():
        params = " ".join(f"?x{i} - {t}" for i, t in enumerate(sig))
        lines.append(f"    ({p}{' ' + params if params else ''})")
    lines.append("  )")
    costs = any(a.cost != 1 for a in domain.actions)
    if costs:
        lines.append("  (:functions (total-cost))")
    for a in domain.actions:
        lines.append(f"  (:action {a.name}")
        lines.append(f"    :parameters ({typed(a.parameters)})")
        lines.append("    :precondition (and " + " ".join(atom(x) for x in a.precondition) + ")")
        eff = [atom(x) for x in a.add] + [f"(not {atom(x)})" for x in a.delete]
        if costs:
            eff.append(f"(increase (total-cost) {a.cost:g})")
        lines.append("    :effect (and " + " ".join(eff) + "))")
    lines.append(")")
    return "\n".join(lines) + "\n"


def load_task(domain_text: str, problem_text: str) -> GroundTask:
    domain = parse_domain(domain_text)
    return ground(domain, parse_problem(problem_text, domain))

