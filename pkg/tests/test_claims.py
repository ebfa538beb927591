import re
from pathlib import Path

from injres.verifier import SCENARIOS

CLAIMS = Path(__file__).parents[1] / 'docs' / 'CLAIMS.md'


def documented() -> dict[str, set[str]]:
    sections: dict[str, set[str]] = {}
    current = None
    for line in CLAIMS.read_text(encoding='utf8').splitlines():
        if line.startswith('## '):
            current = sections.setdefault(line[3:].strip(), set())
        elif current is not None and (m := re.match(r'- `([a-z-]+)`', line)):
            current.add(m.group(1))
    return sections


def test_every_claim_is_documented_under_its_scenario():
    sections = documented()
    assert set(sections) == set(SCENARIOS)
    for name, checks in SCENARIOS.items():
        assert sections[name] == {claim for _, claim, _ in checks}
