"""Twists of 15a7 by primes 7 <= ell <= 47 with their corank certificates."""

from twistlab.arith import sieve_primes
from twistlab.lmfdb import fetch_curve
from twistlab.twist import certify, classify_prime
from twistlab.verify import profile_from_record

P = profile_from_record(fetch_curve("15a7", offline=True))
print(f"{'ell':>4} {'mod 8':>5} {'in K':>6} {'lambda':>6} {'omega':>5}  conclusion")
for ell in sieve_primes(47).tolist():
    if ell < 7:
        continue
    pc = classify_prime(P, ell)
    c = certify(P, ell)
    mark = "*" if c.corank_one_proved else " "
    print(f"{ell:>4} {pc.residue_mod8:>5} {'split' if pc.split_in_K else 'inert':>6} {c.lambda2_twist:>6} "
          f"{c.omega_twist:>+5}  {c.conclusion}{mark}")
