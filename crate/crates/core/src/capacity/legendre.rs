/// Legendre polynomial `P_k(x)` by the three-term recurrence
/// `(n+1) P_{n+1} = (2n+1) x P_n − n P_{n−1}`.
pub fn legendre(degree: usize, x: f64) -> f64 {
    match degree {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for n in 1..degree {
                let nf = n as f64;
                let next = ((2.0 * nf + 1.0) * x * cur - nf * prev) / (nf + 1.0);
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}
