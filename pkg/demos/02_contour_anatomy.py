"""Dissecting a configuration into subcontours and contours.

Deviating sites sharing a spin value and touching at Chebyshev distance one
form subcontours; subcontours within distance r of each other cluster into
contours.  Each contour owns a disjoint share of the improper cubes, and
resetting its interior to the exterior spin removes it without disturbing
the others.
"""

import numpy as np

from peierls import (Box, Configuration, boundary, conditional_hamiltonian,
                     contours, potts_model, remove_contour,
                     verify_ground_states)

model = potts_model(q=3)
box = Box((0, 0), (7, 7))
rng = np.random.default_rng(4)

config = Configuration.constant(box, 1).replace({
    (1, 1): 2, (1, 2): 2, (2, 2): 3,      # mixed-mark cluster
    (5, 5): 2, (6, 5): 2, (6, 6): 2,      # same-mark hook
    (1, 6): 3,                            # lone deviation
})


def show(c):
    for x in range(box.lower[0], box.upper[0] + 1):
        row = "".join(str(c.spin_at((x, y)))
                      for y in range(box.lower[1], box.upper[1] + 1))
        print("   " + row.replace("1", "."))


print("configuration (dots are the exterior spin):")
show(config)

found = contours(config, model)
b = boundary(config, model)
print(f"\nboundary: {len(b)} improper cubes; {len(found)} contours")
for i, gamma in enumerate(found):
    marks = sorted({sub.mark for sub in gamma.subcontours})
    print(f"  contour {i}: marks {marks}, interior {sorted(gamma.interior)}, "
          f"size {gamma.size}")
print("sum of contour sizes:", sum(g.size for g in found),
      "== boundary size:", len(b))

gap = verify_ground_states(model).gap
energy = conditional_hamiltonian(config, model)
print(f"\nenergy {energy:g} >= gap * boundary = {gap * len(b):g}")

print("\nremoving the largest contour:")
largest = max(found, key=lambda g: g.size)
after = remove_contour(config, largest)
show(after)
print("remaining contours:", [sorted(g.interior) for g in contours(after, model)])
