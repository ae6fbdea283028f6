//! Minimal double-double arithmetic (about 32 significant digits), real and
//! complex.

use std::f64::consts;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy)]
pub struct Dd(pub f64, pub f64);

pub const PI: Dd = Dd(consts::PI, 1.2246467991473532e-16);
pub const HALF_PI: [f64; 3] = [
    consts::FRAC_PI_2,
    6.123233995736766e-17,
    -1.4973849048591698e-33,
];
pub const FRAC_1_SQRT_2: Dd = Dd(consts::FRAC_1_SQRT_2, -4.833646656726457e-17);

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd(s, (a - (s - bb)) + (b - bb))
}

fn quick(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd(s, b - (s - a))
}

pub fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd(p, a.mul_add(b, -p))
}

impl Dd {
    pub fn from(x: f64) -> Self {
        Dd(x, 0.0)
    }

    pub fn to_f64(self) -> f64 {
        self.0 + self.1
    }

    pub fn sqrt(self) -> Self {
        let s = self.0.sqrt();
        let r = self - two_prod(s, s);
        quick(s, r.0 / (2.0 * s))
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.0, o.0);
        let t = two_sum(self.1, o.1);
        let s = quick(s.0, s.1 + t.0);
        quick(s.0, s.1 + t.1)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd(-self.0, -self.1)
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let p = two_prod(self.0, o.0);
        quick(p.0, p.1 + self.0 * o.1 + self.1 * o.0)
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.0 / o.0;
        let r = self - o * Dd::from(q1);
        let q2 = r.0 / o.0;
        let r = r - o * Dd::from(q2);
        let q3 = r.0 / o.0;
        let q = quick(q1, q2);
        q + Dd::from(q3)
    }
}

/// Complex number with double-double parts.
#[derive(Debug, Clone, Copy)]
pub struct CDd {
    pub re: Dd,
    pub im: Dd,
}

impl CDd {
    pub const ZERO: CDd = CDd {
        re: Dd(0.0, 0.0),
        im: Dd(0.0, 0.0),
    };
    pub const ONE: CDd = CDd {
        re: Dd(1.0, 0.0),
        im: Dd(0.0, 0.0),
    };
    pub const I: CDd = CDd {
        re: Dd(0.0, 0.0),
        im: Dd(1.0, 0.0),
    };

    pub fn new(re: f64, im: f64) -> Self {
        CDd {
            re: Dd::from(re),
            im: Dd::from(im),
        }
    }

    pub fn scale(self, k: f64) -> Self {
        CDd {
            re: self.re * Dd::from(k),
            im: self.im * Dd::from(k),
        }
    }

    /// Principal square root.
    pub fn sqrt(self) -> Self {
        let (a, b) = (self.re, self.im);
        if a.0 == 0.0 && b.0 == 0.0 {
            return CDd::ZERO;
        }
        let r = (a * a + b * b).sqrt();
        let half = Dd::from(0.5);
        if a.0 >= 0.0 {
            let re = ((r + a) * half).sqrt();
            CDd {
                re,
                im: b / (re * Dd::from(2.0)),
            }
        } else {
            let mut im = ((r - a) * half).sqrt();
            if b.0 < 0.0 {
                im = -im;
            }
            CDd {
                re: b / (im * Dd::from(2.0)),
                im,
            }
        }
    }
}

impl Add for CDd {
    type Output = CDd;
    fn add(self, o: CDd) -> CDd {
        CDd {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
}

impl Sub for CDd {
    type Output = CDd;
    fn sub(self, o: CDd) -> CDd {
        CDd {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
}

impl Neg for CDd {
    type Output = CDd;
    fn neg(self) -> CDd {
        CDd {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Mul for CDd {
    type Output = CDd;
    fn mul(self, o: CDd) -> CDd {
        CDd {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

impl Div for CDd {
    type Output = CDd;
    fn div(self, o: CDd) -> CDd {
        let den = o.re * o.re + o.im * o.im;
        CDd {
            re: (self.re * o.re + self.im * o.im) / den,
            im: (self.im * o.re - self.re * o.im) / den,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn third_is_exact_to_thirty_digits() {
        let third = Dd::from(1.0) / Dd::from(3.0);
        let back = third * Dd::from(3.0) - Dd::from(1.0);
        assert!(back.to_f64().abs() < 1e-31);
    }

    #[test]
    fn complex_sqrt_squares_back() {
        for &(a, b) in &[(2.0, 1.0), (-3.0, 0.5), (-1.0, -4.0), (0.0, 2.0)] {
            let z = CDd::new(a, b);
            let r = z.sqrt();
            let d = r * r - z;
            assert!(d.re.to_f64().abs() < 1e-30 && d.im.to_f64().abs() < 1e-30);
            assert!(r.re.0 >= 0.0);
        }
    }
}
