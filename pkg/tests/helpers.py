from src.services.machine_core import BinaryTM, HaltMode


def make_tm(rules, state_count=None, halt_mode=HaltMode.LEFT_ROLL_OFF, halt_states=(), accept_states=(), start=0):
    """rules: {(q, b): (q', b', 'L'|'R')}"""
    if state_count is None:
        state_count = 1 + max(max(q, q2) for (q, _), (q2, _, _) in rules.items())
    return BinaryTM(
        state_count=state_count,
        start=start,
        rules=dict(rules),
        halt_mode=halt_mode,
        halt_states=frozenset(halt_states),
        accept_states=frozenset(accept_states),
    )
