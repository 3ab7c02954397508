#pragma once

// Closed-form scalar entries of the parabolic and triangle recurrence blocks.
// Removable 0/0 points (level 0, phase 0) are evaluated through their cancelled forms.

namespace qbd {

/// Entries of row k at level n. Axis 1: a, b, c (diagonal). Axis 2: superscript (1) sits one
/// column left of the diagonal position, (2) on it, (3) one column right.
template <typename Scalar = double>
struct PhaseEntries {
  Scalar a{0}, b{0}, c{0};
  Scalar a1{0}, a2{0}, a3{0};
  Scalar b1{0}, b2{0}, b3{0};
  Scalar c1{0}, c2{0}, c3{0};
};

template <typename Scalar>
Scalar triangleCorrection(Scalar beta, Scalar gamma, int k) {
  const Scalar t = beta + gamma;
  if (k == 0) return (beta - gamma) / (t + 2);
  const Scalar kk = Scalar(k);
  return (beta * beta - gamma * gamma) / ((2 * kk + t + 2) * (2 * kk + t));
}

/// D_k^{beta,gamma}.
template <typename Scalar>
Scalar triangleD(Scalar beta, Scalar gamma, int k) {
  return (1 + triangleCorrection(beta, gamma, k)) / 2;
}

/// Triangle family normalized at (0,1): -x and y recurrences.
template <typename Scalar>
PhaseEntries<Scalar> triangle01Entries(Scalar alpha, Scalar beta, Scalar gamma, int n, int k) {
  PhaseEntries<Scalar> e;
  const Scalar s = alpha + beta + gamma;
  const Scalar t = beta + gamma;
  const Scalar N = Scalar(n);
  const Scalar K = Scalar(k);
  // (n+k+s+2)/(2n+s+2) and (k+t+1)/(2k+t+1) are 1 at n=k=0 and k=0 respectively
  const Scalar upRatio = (n == 0) ? Scalar(1) : (N + K + s + 2) / (2 * N + s + 2);
  const Scalar phaseRatio = (k == 0) ? Scalar(1) : (K + t + 1) / (2 * K + t + 1);

  e.a = (N - K + alpha + 1) * upRatio / (2 * N + s + 3);
  if (k <= n - 1) e.c = (N - K) * (N + K + t + 1) / ((2 * N + s + 1) * (2 * N + s + 2));
  e.b = -(e.a + e.c);

  const Scalar D = triangleD(beta, gamma, k);
  if (k >= 1)
    e.a1 = (N - K + alpha + 1) * (N - K + alpha + 2) * K * (K + beta) /
           ((2 * N + s + 2) * (2 * N + s + 3) * (2 * K + t) * (2 * K + t + 1));
  e.a2 = D * e.a;
  e.a3 = upRatio * (N + K + s + 3) * (K + gamma + 1) * phaseRatio / ((2 * N + s + 3) * (2 * K + t + 2));

  if (k >= 1)
    e.b1 = 2 * K * (K + beta) * (N - K + alpha + 1) * (N + K + t + 1) /
           ((2 * K + t) * (2 * K + t + 1) * (2 * N + s + 1) * (2 * N + s + 3));
  e.b2 = D * (1 + e.b);
  if (k <= n - 1)
    e.b3 = 2 * (N - K) * (N + K + s + 2) * (K + gamma + 1) * phaseRatio /
           ((2 * N + s + 1) * (2 * N + s + 3) * (2 * K + t + 2));

  if (k >= 1)
    e.c1 = (N + K + t) * (N + K + t + 1) * (K + beta) * K /
           ((2 * N + s + 1) * (2 * N + s + 2) * (2 * K + t) * (2 * K + t + 1));
  e.c2 = D * e.c;
  if (k <= n - 2)
    e.c3 = (N - K - 1) * (N - K) * phaseRatio * (K + gamma + 1) /
           ((2 * N + s + 1) * (2 * N + s + 2) * (2 * K + t + 2));
  return e;
}

/// Triangle family normalized at (0,0): -x and -y recurrences. Off-band axis-2 entries are the
/// (0,1) ones with beta and gamma interchanged; the (2) entries are negated without the interchange.
template <typename Scalar>
PhaseEntries<Scalar> triangle00Entries(Scalar alpha, Scalar beta, Scalar gamma, int n, int k) {
  PhaseEntries<Scalar> e = triangle01Entries(alpha, beta, gamma, n, k);
  const PhaseEntries<Scalar> sw = triangle01Entries(alpha, gamma, beta, n, k);
  e.a1 = sw.a1;
  e.a3 = sw.a3;
  e.b1 = sw.b1;
  e.b3 = sw.b3;
  e.c1 = sw.c1;
  e.c3 = sw.c3;
  e.a2 = -e.a2;
  e.b2 = -e.b2;
  e.c2 = -e.c2;
  return e;
}

/// Parabolic family normalized at (1,1). Axis 2 has only a3, b1, b3, c1 nonzero.
template <typename Scalar>
PhaseEntries<Scalar> parabolicEntries(Scalar alpha, Scalar beta, int n, int k) {
  PhaseEntries<Scalar> e;
  const Scalar N = Scalar(n);
  const Scalar K = Scalar(k);
  const Scalar h = alpha + beta;
  const Scalar up = 2 * N - K + h + Scalar(1.5);  // (2n-k+alpha+beta+3/2)
  const Scalar dn = 2 * N - K + h + Scalar(0.5);  // (2n-k+alpha+beta+1/2)
  // (n+alpha+beta+3/2)/(2n-k+alpha+beta+3/2) equals 1 when k = n
  const Scalar upRatio = (k == n) ? Scalar(1) : (N + h + Scalar(1.5)) / up;

  e.a = (N - K + alpha + 1) * upRatio / (up + 1);
  if (n == 0) {
    e.b = (beta + Scalar(1.5)) / (h + Scalar(2.5));
  } else {
    // second term: (n+alpha+beta+1/2)/(2n-k+alpha+beta+1/2) equals 1 when k = n
    const Scalar dnRatio = (k == n) ? Scalar(1) : (N + h + Scalar(0.5)) / dn;
    e.b = (N - K + 1) * (N - K + alpha + 1) / (up * (up + 1)) +
          dnRatio * (N + beta + Scalar(0.5)) / (dn + 1);
  }
  if (k <= n - 1) e.c = (N - K) * (N + beta + Scalar(0.5)) / (dn * (dn + 1));

  // (k+2beta+1)/(2k+2beta+1) equals 1 at k = 0
  const Scalar phaseRatio = (k == 0) ? Scalar(1) : (K + 2 * beta + 1) / (2 * K + 2 * beta + 1);
  e.a3 = phaseRatio * upRatio;
  if (k >= 1) e.b1 = K * (N - K + alpha + 1) / ((2 * K + 2 * beta + 1) * up);
  if (k <= n - 1) e.b3 = phaseRatio * (N - K) / up;
  if (k >= 1) e.c1 = K * (N + beta + Scalar(0.5)) / ((2 * K + 2 * beta + 1) * up);
  return e;
}

}  // namespace qbd
