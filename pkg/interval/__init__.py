# Interval arithmetic kernel
from interval.big_interval import (
    BigInterval,
    CertifiedOrder,
    add,
    arith,
    bit_size,
    ceil_mpfr,
    certainly_le,
    compare,
    decimal_digits_for,
    div,
    elementary,
    exp,
    exp2,
    floor_mpfr,
    from_decimal_bounds,
    from_fraction,
    from_integer,
    hull,
    ln,
    ln2,
    log2,
    mul,
    nth_root,
    point,
    pow_int,
    pow_real,
    sqrt,
    sub,
    to_decimal_bounds,
    to_fraction,
)
