"""Independent dense re-implementations used as test oracles."""

import math

import numpy as np
from scipy.special import gammaln

from eigenprob.schema import basis_centers, encode_membership, normalize_value


def dense_blocks(model, point, target, evidence, loo=None):
    """Normalized target block from a direct linear solve on the dense, optionally masked, graph."""
    schema, layout, g = model.schema, model.layout, model.graph
    N, M = g.n_objects, layout.total_width
    B = g.B.toarray()
    if loo is not None:
        B[loo] = 0.0
    W = np.zeros((N + M, N + M))
    W[:N, N:], W[N:, :N] = B, B.T
    theta = np.zeros(N + M)
    for j in evidence:
        s = layout.block(j)
        spec = schema[j]
        if spec.is_discrete:
            theta[N + s.start + int(point[j])] += 1.0
        else:
            theta[N + s.start:N + s.stop] += encode_membership(normalize_value(spec, point[j]), spec.basis)
    theta /= theta.sum()
    d = model.config.damping
    c = np.linalg.solve(np.eye(N + M) - d * W / g.spectral_radius, (1 - d) * theta)
    s = layout.block(target)
    block = c[N + s.start:N + s.stop]
    return block / block.sum()


def log_beta_pdf(p, q, x, eps=1e-3):
    x = min(max(x, eps), 1 - eps)
    return (p - 1) * math.log(x) + (q - 1) * math.log(1 - x) - (gammaln(p) + gammaln(q) - gammaln(p + q))


def conditional_log_prob(model, point, target, evidence, alpha, beta, loo=None, eps=1e-3):
    spec = model.schema[target]
    marg = model.marginals[target]
    if not evidence:
        if spec.is_discrete:
            return math.log(marg.pmf[int(point[target])])
        return log_beta_pdf(marg.spec.p, marg.spec.q, normalize_value(spec, point[target]))
    c = dense_blocks(model, point, target, evidence, loo)
    if spec.is_discrete:
        m = marg.pmf
        w = np.array([mj * (cj / mj) ** alpha for cj, mj in zip(c, m)])
        return math.log(max(w[int(point[target])] / w.sum(), 1e-12))
    mu = min(max(float(c @ basis_centers(spec.basis)), eps), 1 - eps)
    return log_beta_pdf(beta * mu, beta * (1 - mu), normalize_value(spec, point[target]))


def joint_log_prob(model, point, alpha, beta, loo=None):
    order = list(model.chain_order)
    return sum(conditional_log_prob(model, point, t, order[k + 1:], alpha, beta, loo) for k, t in enumerate(order))


def log_likelihood(model, alpha, beta, loo=True):
    rows = model.dataset.values
    return sum(joint_log_prob(model, r, alpha, beta, i if loo else None) for i, r in enumerate(rows))
