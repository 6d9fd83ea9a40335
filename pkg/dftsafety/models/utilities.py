import re

_PLAIN_ID = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")

KEYWORDS = frozenset(
    [
        "toplevel",
        "param",
        "label",
        "and",
        "or",
        "pand",
        "seq",
        "wsp",
        "csp",
        "hsp",
        "spare",
        "fdep",
        "adep",
        "when",
        "failed",
        "true",
        "false",
        "not",
    ]
)


def _classname(o):
    """A helper function for use in __repr__ methods: dftsafety.Dft."""
    return "dftsafety.{}".format(o.__class__.__qualname__)


def quote_id(element_id: str) -> str:
    """Quotes an element id unless it is a plain, non-keyword identifier."""
    if _PLAIN_ID.match(element_id) and element_id.lower() not in KEYWORDS:
        return element_id
    return '"{}"'.format(element_id.replace("\\", "\\\\").replace('"', '\\"'))


def format_float(value: float) -> str:
    """Shortest round-tripping text for a float."""
    return repr(float(value))
