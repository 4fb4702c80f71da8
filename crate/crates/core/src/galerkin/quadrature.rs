//! Gauss–Legendre rules on `[0, 1]`.

/// Nodes and weights of the `order`-point rule on `[-1, 1]`, by Newton
/// iteration on `P_order` from the Chebyshev-like initial guesses.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let n = order as f64;
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    for i in 0..order.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                let (_, d) = legendre(order, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule on `[0, 1]`: `panels` equal panels, `order` points each.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeRule {
    pub fn new(panels: usize, order: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        let h = 1.0 / panels as f64;
        let mut points = Vec::with_capacity(panels * order);
        let mut ws = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let left = p as f64 * h;
            for (x, w) in nodes.iter().zip(&weights) {
                points.push(left + 0.5 * h * (x + 1.0));
                ws.push(0.5 * h * w);
            }
        }
        Self { points, weights: ws }
    }

    /// Panel count used for `modes` basis functions.
    pub fn for_modes(modes: usize) -> Self {
        Self::new(32.max(4 * modes), 8)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&x, w)| w * f(x)).sum()
    }
}
