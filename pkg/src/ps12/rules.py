"""Baked midpoint rules.

Each rule maps an output functional at the midpoint of AB to rational weights
on the input functionals.  Corner derivatives are taken in the frame (t, m) of
the edge AB: ``t = vB - vA`` and ``m`` points from ``vC`` to the midpoint.
The tables are regenerated and compared against these constants by
``ps12 verify --suite rules``.
"""

from fractions import Fraction

INIT_INPUTS = ('f_A', 'f^t_A', 'f^m_A', 'f^tt_A', 'f^tm_A', 'f^mm_A', 'f^ttt_A', 'f^ttm_A', 'f^tmm_A', 'f^mmm_A', 'f_B', 'f^t_B', 'f^m_B', 'f^tt_B', 'f^tm_B', 'f^mm_B', 'f^ttt_B', 'f^ttm_B', 'f^tmm_B', 'f^mmm_B', 'f_C', 'f^t_C', 'f^m_C', 'f^tt_C', 'f^tm_C', 'f^mm_C', 'f^ttt_C', 'f^ttm_C', 'f^tmm_C', 'f^mmm_C', 'f^m_AB', 'f^mm_AAB', 'f^mm_ABB', 'f^mA_BC', 'f^mAmA_BBC', 'f^mAmA_BCC', 'f^mB_CA', 'f^mBmB_CCA', 'f^mBmB_CAA')

SUBDIV_INPUTS = ('f_A', 'f^t_A', 'f^m_A', 'f^tt_A', 'f^tm_A', 'f^mm_A', 'f^ttt_A', 'f^ttm_A', 'f^tmm_A', 'f^mmm_A', 'f_B', 'f^t_B', 'f^m_B', 'f^tt_B', 'f^tm_B', 'f^mm_B', 'f^ttt_B', 'f^ttm_B', 'f^tmm_B', 'f^mmm_B', 'f_C', 'f^t_C', 'f^m_C', 'f^tt_C', 'f^tm_C', 'f^mm_C', 'f^ttt_C', 'f^ttm_C', 'f^tmm_C', 'f^mmm_C')

INIT_RULES = {
    'f_AB': {
        'f_A': '1/2',
        'f^t_A': '7/40',
        'f^tt_A': '1/40',
        'f^ttt_A': '1/640',
        'f_B': '1/2',
        'f^t_B': '-7/40',
        'f^tt_B': '1/40',
        'f^ttt_B': '-1/640',
    },
    'f^t_AB': {
        'f_A': '-5/2',
        'f^t_A': '-3/4',
        'f^tt_A': '-3/32',
        'f^ttt_A': '-1/192',
        'f_B': '5/2',
        'f^t_B': '-3/4',
        'f^tt_B': '3/32',
        'f^ttt_B': '-1/192',
    },
    'f^tt_AB': {
        'f^t_A': '-2',
        'f^tt_A': '-1/2',
        'f^ttt_A': '-1/24',
        'f^t_B': '2',
        'f^tt_B': '-1/2',
        'f^ttt_B': '1/24',
    },
    'f^tm_AB': {
        'f^m_A': '-2',
        'f^tm_A': '-1/2',
        'f^ttm_A': '-1/24',
        'f^m_B': '2',
        'f^tm_B': '-1/2',
        'f^ttm_B': '1/24',
    },
    'f^mm_AB': {
        'f^mm_A': '-1/2',
        'f^tmm_A': '-1/16',
        'f^mm_B': '-1/2',
        'f^tmm_B': '1/16',
        'f^mm_AAB': '1',
        'f^mm_ABB': '1',
    },
    'f^ttt_AB': {
        'f_A': '120',
        'f^t_A': '60',
        'f^tt_A': '21/2',
        'f^ttt_A': '3/4',
        'f_B': '-120',
        'f^t_B': '60',
        'f^tt_B': '-21/2',
        'f^ttt_B': '3/4',
    },
    'f^ttm_AB': {
        'f^m_A': '24',
        'f^tm_A': '6',
        'f^ttm_A': '1/2',
        'f^m_B': '24',
        'f^tm_B': '-6',
        'f^ttm_B': '1/2',
        'f^m_AB': '-48',
    },
    'f^tmm_AB': {
        'f^mm_A': '4',
        'f^tmm_A': '1/2',
        'f^mm_B': '-4',
        'f^tmm_B': '1/2',
        'f^mm_AAB': '-8',
        'f^mm_ABB': '8',
    },
    'f^mmm_AB': {
        'f_A': '45',
        'f^t_A': '36',
        'f^m_A': '45',
        'f^tt_A': '567/64',
        'f^tm_A': '153/16',
        'f^mm_A': '-217/16',
        'f^ttt_A': '303/512',
        'f^ttm_A': '43/256',
        'f^tmm_A': '-251/128',
        'f^mmm_A': '25/64',
        'f_B': '45',
        'f^t_B': '-36',
        'f^m_B': '45',
        'f^tt_B': '567/64',
        'f^tm_B': '-153/16',
        'f^mm_B': '-217/16',
        'f^ttt_B': '-303/512',
        'f^ttm_B': '43/256',
        'f^tmm_B': '251/128',
        'f^mmm_B': '25/64',
        'f_C': '-90',
        'f^m_C': '-24',
        'f^tt_C': '-135/32',
        'f^mm_C': '-23/8',
        'f^ttm_C': '-79/128',
        'f^mmm_C': '-5/32',
        'f^m_AB': '-108',
        'f^mm_AAB': '15',
        'f^mm_ABB': '15',
        'f^mA_BC': '48',
        'f^mAmA_BBC': '-7',
        'f^mAmA_BCC': '1',
        'f^mB_CA': '48',
        'f^mBmB_CCA': '1',
        'f^mBmB_CAA': '-7',
    },
}

SUBDIV_RULES = {
    'f_AB': {
        'f_A': '1/2',
        'f^t_A': '7/40',
        'f^tt_A': '1/40',
        'f^ttt_A': '1/640',
        'f_B': '1/2',
        'f^t_B': '-7/40',
        'f^tt_B': '1/40',
        'f^ttt_B': '-1/640',
    },
    'f^t_AB': {
        'f_A': '-5/2',
        'f^t_A': '-3/4',
        'f^tt_A': '-3/32',
        'f^ttt_A': '-1/192',
        'f_B': '5/2',
        'f^t_B': '-3/4',
        'f^tt_B': '3/32',
        'f^ttt_B': '-1/192',
    },
    'f^m_AB': {
        'f^m_A': '1/2',
        'f^tm_A': '5/32',
        'f^ttm_A': '1/64',
        'f^m_B': '1/2',
        'f^tm_B': '-5/32',
        'f^ttm_B': '1/64',
    },
    'f^tt_AB': {
        'f^t_A': '-2',
        'f^tt_A': '-1/2',
        'f^ttt_A': '-1/24',
        'f^t_B': '2',
        'f^tt_B': '-1/2',
        'f^ttt_B': '1/24',
    },
    'f^tm_AB': {
        'f^m_A': '-2',
        'f^tm_A': '-1/2',
        'f^ttm_A': '-1/24',
        'f^m_B': '2',
        'f^tm_B': '-1/2',
        'f^ttm_B': '1/24',
    },
    'f^mm_AB': {
        'f^mm_A': '1/2',
        'f^tmm_A': '1/8',
        'f^mm_B': '1/2',
        'f^tmm_B': '-1/8',
    },
    'f^ttt_AB': {
        'f_A': '120',
        'f^t_A': '60',
        'f^tt_A': '21/2',
        'f^ttt_A': '3/4',
        'f_B': '-120',
        'f^t_B': '60',
        'f^tt_B': '-21/2',
        'f^ttt_B': '3/4',
    },
    'f^ttm_AB': {
        'f^tm_A': '-3/2',
        'f^ttm_A': '-1/4',
        'f^tm_B': '3/2',
        'f^ttm_B': '-1/4',
    },
    'f^tmm_AB': {
        'f^mm_A': '-3/2',
        'f^tmm_A': '-1/4',
        'f^mm_B': '3/2',
        'f^tmm_B': '-1/4',
    },
    'f^mmm_AB': {
        'f_A': '45',
        'f^t_A': '18',
        'f^m_A': '-21',
        'f^tt_A': '45/16',
        'f^tm_A': '-63/8',
        'f^mm_A': '15/4',
        'f^ttt_A': '3/16',
        'f^ttm_A': '-7/8',
        'f^tmm_A': '5/4',
        'f^mmm_A': '1/4',
        'f_B': '45',
        'f^t_B': '-18',
        'f^m_B': '-21',
        'f^tt_B': '45/16',
        'f^tm_B': '63/8',
        'f^mm_B': '15/4',
        'f^ttt_B': '-3/16',
        'f^ttm_B': '-7/8',
        'f^tmm_B': '-5/4',
        'f^mmm_B': '1/4',
        'f_C': '-90',
        'f^m_C': '-48',
        'f^tt_C': '9/8',
        'f^mm_C': '-21/2',
        'f^ttm_C': '1/4',
        'f^mmm_C': '-1',
    },
}


def as_fractions(table: dict) -> dict:
    return {out: {k: Fraction(v) for k, v in terms.items()} for out, terms in table.items()}
