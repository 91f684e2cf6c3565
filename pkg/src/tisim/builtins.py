"""Built-in scenarios, stored as scenario-language source text."""

from __future__ import annotations

QLE_SINGLE = """\
scenario qle-single
# Mach-Zehnder interferometer with a Hardy atom in each arm
source S emits s
atom A1 id 1 prep yminus blocks z- in u out u'
atom A2 id 2 prep yminus blocks z+ in v out v'
beamsplitter BS1 in s r out u v
beamsplitter BS2 in u' v' out d c
detector C absorbs c
detector D absorbs d
spin-detector atom 1 axis z
spin-detector atom 2 axis z
universal-absorber
stage uv : BS1
stage u'v' : A1 A2
stage cd : BS2
"""

QLE_DUAL = """\
scenario qle-dual-source
# truncated interferometer: two coherent sources replace BS1 and the mirrors
dual-source S emits u v phase 0.0
atom A1 id 1 prep yminus blocks z- in u out u'
atom A2 id 2 prep yminus blocks z+ in v out v'
beamsplitter BS2 in u' v' out d c
detector C absorbs c
detector D absorbs d
spin-detector atom 1 axis z
spin-detector atom 2 axis z
universal-absorber
stage u'v' : A1 A2
stage cd : BS2
"""

IFM_NO_OBJECT = """\
scenario ifm-no-object
source S emits s
beamsplitter BS1 in s r out u v
mirror M1 u -> u'
mirror M2 v -> v'
beamsplitter BS2 in u' v' out d c
detector C absorbs c
detector D absorbs d
stage uv : BS1
stage u'v' : M1 M2
stage cd : BS2
"""

IFM_WITH_OBJECT = """\
scenario ifm-with-object
# a perfectly absorbing object O sits in arm v; BS2 sees vacuum in its v' port
source S emits s
beamsplitter BS1 in s r out u v
mirror M1 u -> u'
beamsplitter BS2 in u' v' out d c
detector O absorbs v
detector C absorbs c
detector D absorbs d
stage uv : BS1
stage u'v' : M1
stage cd : BS2
"""

MAUDLIN = """\
scenario maudlin-contingent
# C and D sit in arm a; D swings over to arm b if C has not fired in time
source S emits s
beamsplitter BS in s r out a b
detector C absorbs a
detector D absorbs b
universal-absorber
stage ab : BS
contingent on C silent : D
"""

BUILTINS: dict[str, tuple[str, str]] = {
    "maudlin-contingent": ("contingent absorber: D moves to the other arm when C stays silent", MAUDLIN),
    "ifm-with-object": ("interaction-free measurement, absorbing object in arm v", IFM_WITH_OBJECT),
    "ifm-no-object": ("interaction-free measurement, empty interferometer", IFM_NO_OBJECT),
    "qle-single": ("quantum liar experiment, single source and two Hardy atoms", QLE_SINGLE),
    "qle-dual-source": ("quantum liar experiment fed by two coherent sources", QLE_DUAL),
}


def list_builtins() -> list[tuple[str, str]]:
    return [(name, desc) for name, (desc, _) in BUILTINS.items()]


def builtin_source(name: str) -> str:
    try:
        return BUILTINS[name][1]
    except KeyError:
        raise KeyError(f"unknown built-in scenario {name!r}; try list-builtin") from None


def load_builtin(name: str):
    from .lang import load

    return load(builtin_source(name))
