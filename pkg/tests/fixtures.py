"""
Small DFTs with closed-form measures, shared by the test modules.
"""

import os

import dftsafety

F_OR = """
toplevel T;
T or A B;
A lambda=1e-3;
B lambda=2e-3;
"""

F_AND = """
toplevel T;
T and A B;
A lambda=1;
B lambda=2;
"""

F_PAND = """
toplevel T;
T pand A B;
A lambda=1;
B lambda=1;
"""

F_CSP = """
toplevel T;
T wsp P S;
P lambda=1;
S lambda=1 dorm=0.0;
"""

F_WSP = """
toplevel T;
T wsp P S;
P lambda=1;
S lambda=1 dorm=0.5;
"""

F_VOT = """
toplevel T;
T 2of3 A B C;
A lambda=1;
B lambda=1;
C lambda=1;
"""

F_TRANS = """
toplevel T;
T and P X;
P lambda=1;
X lambda=1 transient;
"""

F_SINGLE = """
toplevel T;
T or A;
param lambda_a=1e-6;
A lambda=lambda_a;
"""

D_AND = F_AND + "label degraded when failed(A) | failed(B);\n"

D_WSP = F_WSP + "label degraded when failed(P);\n"

ALL = {
    "F_OR": F_OR,
    "F_AND": F_AND,
    "F_PAND": F_PAND,
    "F_CSP": F_CSP,
    "F_WSP": F_WSP,
    "F_VOT": F_VOT,
    "F_TRANS": F_TRANS,
    "F_SINGLE": F_SINGLE,
}

SCENARIOS = os.path.join(os.path.dirname(__file__), "scenarios")


def load(text: str) -> dftsafety.Dft:
    return dftsafety.parse_dft(text)


def chain(text: str, **valuation) -> dftsafety.Ctmc:
    return dftsafety.build_ctmc(load(text), valuation=valuation or None)


def scenario_path(name: str) -> str:
    return os.path.join(SCENARIOS, name)
