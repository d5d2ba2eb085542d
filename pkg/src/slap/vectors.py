"""Deterministic hex test vectors, one JSON object per line.

Regenerating with the same code must reproduce every file byte for byte;
the test suite compares fresh output against the checked-in copies.
"""
from __future__ import annotations

import json
import random
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional

from .dac import cred_prove, cred_verify, create_cred, dac_keygen, dac_setup, RootIssuer
from .group import G1Point, G2Point, hash_to_g1, hash_to_g2, hash_to_scalar, pairing, BigModulus, rsa_modulus_gen
from .gsig import SLAP_FIELDS, field_scalar, gs_keygen, gs_setup, gs_sign, gs_verify
from .setcommit import Attribute, AttributeSet, sc_commit, sc_open_subset, sc_setup, sc_verify_subset
from .tlp import PuzzleRegistry, message_element, puzzle_from_modulus, puzzle_solve, solution_verify

MODULES = ("tlp", "group", "gsig", "setcommit", "dac")


def _hex(b: bytes) -> str:
    return b.hex()


def tlp_vectors() -> List[dict]:
    out = []
    toy = puzzle_from_modulus(BigModulus.from_primes(11, 23), 5, d=27, registry=PuzzleRegistry())
    sol = puzzle_solve(2, toy.puzzle)
    out.append({"name": "toy", "p": 11, "q": 23, "n": toy.puzzle.n, "d": toy.d, "e": toy.e, "kappa": 5,
                "r": pow(2, 5, 220), "z": toy.puzzle.z, "e_tilde": toy.puzzle.e_tilde, "m": 2, "c": sol.c,
                "verifies": solution_verify(toy.d, toy.puzzle.n, sol)})
    rng = random.Random(20)
    for bits, kappa in ((512, 1000), (1024, 300)):
        keys = puzzle_from_modulus(rsa_modulus_gen(bits, rng), kappa, registry=PuzzleRegistry())
        m = message_element(f"vector/{bits}".encode(), keys.puzzle.n)
        sol = puzzle_solve(m, keys.puzzle)
        out.append({"name": f"rsa{bits}", "n": f"{keys.puzzle.n:x}", "d": f"{keys.d:x}", "e": keys.e,
                    "kappa": kappa, "z": f"{keys.puzzle.z:x}", "m": f"{m:x}", "c": f"{sol.c:x}",
                    "puzzle": _hex(keys.puzzle.to_bytes()),
                    "verifies": solution_verify(keys.d, keys.puzzle.n, sol)})
    return out


def group_vectors() -> List[dict]:
    g1, g2 = G1Point.generator(), G2Point.generator()
    out = [{"name": "generators", "g1": _hex(g1.to_bytes()), "g2": _hex(g2.to_bytes())},
           {"name": "identity", "g1": _hex(G1Point.identity().to_bytes()),
            "g2": _hex(G2Point.identity().to_bytes())}]
    for k in (1, 2, 7, 2**64 + 13):
        out.append({"name": f"mul/{k}", "k": k, "g1": _hex((g1 * k).to_bytes()), "g2": _hex((g2 * k).to_bytes())})
    out.append({"name": "pairing/gen", "gt": _hex(pairing(g1, g2).to_bytes())})
    for msg in (b"", b"abc"):
        out.append({"name": f"hash/{msg.decode() or 'empty'}", "msg": _hex(msg),
                    "scalar": f"{hash_to_scalar(b'vector', msg):x}",
                    "g1": _hex(hash_to_g1(b"vector", msg).to_bytes()),
                    "g2": _hex(hash_to_g2(b"vector", msg).to_bytes())})
    return out


def gsig_vectors() -> List[dict]:
    rng = random.Random(31)
    params = gs_setup(len(SLAP_FIELDS), b"vector")
    keys = gs_keygen(params, rng)
    out = []
    for i in range(3):
        values = [f"{i * 10 + j}" for j in range(len(SLAP_FIELDS))]
        msgs = [field_scalar(role, v) for role, v in zip(SLAP_FIELDS, values)]
        sig = gs_sign(params, keys, msgs, rng)
        out.append({"name": f"sign/{i}", "gk": _hex(keys.gk.to_bytes()), "fields": dict(zip(SLAP_FIELDS, values)),
                    "sig": _hex(sig.to_bytes()), "verifies": gs_verify(params, keys.gk, msgs, sig)})
    return out


def setcommit_vectors() -> List[dict]:
    rng = random.Random(41)
    params = sc_setup(6, b"vector")
    attrs = AttributeSet([Attribute("device-type", "SU"), Attribute("device-class", "iot"),
                          Attribute("region", "r1")])
    commitment, opening = sc_commit(params, attrs, rng)
    out = []
    for roles in ((), ("device-class",), ("device-type", "region"), ("device-type", "device-class", "region")):
        sub = AttributeSet(a for a in attrs if a.role in roles)
        w = sc_open_subset(params, attrs, sub, opening)
        out.append({"name": f"subset/{'+'.join(roles) or 'empty'}", "commitment": _hex(commitment.to_bytes()),
                    "rho": f"{opening.rho:x}", "disclosed": [[a.role, a.value] for a in sub],
                    "witness": _hex(w.to_bytes()), "verifies": sc_verify_subset(params, commitment, sub, w)})
    return out


def dac_vectors() -> List[dict]:
    rng = random.Random(51)
    params, root = dac_setup(100, 6, 2, b"vector")
    issuer = RootIssuer(params, root, rng)
    keys = dac_keygen(params, rng)
    attrs = AttributeSet([Attribute("device-id", "dev-1"), Attribute("device-type", "SU"),
                          Attribute("device-class", "mobile")])
    cred = create_cred(issuer, keys, attrs, 2, rng)
    disclosed = (AttributeSet([Attribute("device-class", "mobile")]),)
    pres = cred_prove(params, keys, cred, disclosed, b"vector-context", rng)
    return [{"name": "credential", "core": _hex(cred.core_bytes(keys)), "core_size": len(cred.core_bytes(keys)),
             "root_pk": _hex(root.pk.to_bytes())},
            {"name": "presentation", "context": _hex(b"vector-context"), "presentation": _hex(pres.to_bytes()),
             "verifies": cred_verify(params, root.pk, pres, b"vector-context")}]


GENERATORS: Dict[str, Callable[[], List[dict]]] = {
    "tlp": tlp_vectors, "group": group_vectors, "gsig": gsig_vectors,
    "setcommit": setcommit_vectors, "dac": dac_vectors,
}


def render(module: str) -> str:
    return "".join(json.dumps({"module": module, **v}, sort_keys=True) + "\n" for v in GENERATORS[module]())


def write_vectors(out_dir: Path, modules: Optional[Iterable[str]] = None) -> List[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for module in modules or MODULES:
        if module not in GENERATORS:
            raise ValueError(f"unknown vector module {module!r}; choose from {', '.join(MODULES)}")
        path = out_dir / f"{module}.jsonl"
        path.write_text(render(module))
        written.append(path)
    return written
