//! Centralizer shapes of semisimple elements and the ell-radical subgroup
//! classes (up to conjugacy) with their centralizer and normalizer orders.

use crate::arith::{ell_part, sp_order, valuation, Family, PrimeRegime};
use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RadicalError {
    #[error("bad centralizer part '{0}'")]
    BadPart(String),
    #[error("centralizer shape has dimension {got}, expected {want}")]
    Dimension { got: u32, want: u32 },
}

/// GL_n(q^k) when not unitary, GU_n(q^{k/2}) when unitary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ShapePart {
    pub unitary: bool,
    pub n: u32,
    pub k: u32,
}

impl ShapePart {
    pub fn parse(s: &str) -> Result<Self, RadicalError> {
        let bad = || RadicalError::BadPart(s.to_string());
        let (unitary, rest) = if let Some(r) = s.strip_prefix("gl") {
            (false, r)
        } else if let Some(r) = s.strip_prefix("gu") {
            (true, r)
        } else {
            return Err(bad());
        };
        let (n, k) = rest.split_once('^').ok_or_else(bad)?;
        let n: u32 = n.parse().map_err(|_| bad())?;
        let k: u32 = k.parse().map_err(|_| bad())?;
        if n == 0 || k == 0 || (unitary && !k.is_multiple_of(2)) {
            return Err(bad());
        }
        Ok(ShapePart { unitary, n, k })
    }

    /// Contribution to the symplectic dimension.
    pub fn dimension(&self) -> u32 {
        if self.unitary {
            self.k * self.n
        } else {
            2 * self.k * self.n
        }
    }

    pub fn order(&self, q: u64) -> BigUint {
        let (base, sign) = if self.unitary {
            (BigUint::from(q).pow(self.k / 2), true)
        } else {
            (BigUint::from(q).pow(self.k), false)
        };
        let n = self.n;
        let mut out = base.pow(n * (n - 1) / 2);
        for i in 1..=n {
            let p = base.pow(i);
            // Q^i - (-1)^i for GU, Q^i - 1 for GL.
            if sign && i % 2 == 1 {
                out *= p + 1u32;
            } else {
                out *= p - 1u32;
            }
        }
        out
    }
}

impl fmt::Display for ShapePart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = if self.unitary { "gu" } else { "gl" };
        write!(f, "{t}{}^{}", self.n, self.k)
    }
}

/// C_G(t) = Sp_{m0}(q) x prod of GL/GU parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct CentralizerShape {
    pub m0: u32,
    pub parts: Vec<ShapePart>,
}

impl CentralizerShape {
    pub fn parse(m0: &str, parts: &str) -> Result<Self, RadicalError> {
        let m0: u32 = m0.trim().parse().map_err(|_| RadicalError::BadPart(m0.to_string()))?;
        let parts = parts
            .split_whitespace()
            .map(ShapePart::parse)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CentralizerShape { m0, parts })
    }

    pub fn dimension(&self) -> u32 {
        self.m0 + self.parts.iter().map(|p| p.dimension()).sum::<u32>()
    }

    pub fn check(&self, family: Family) -> Result<(), RadicalError> {
        let want = 2 * family.rank();
        let got = self.dimension();
        if got != want || !self.m0.is_multiple_of(2) {
            return Err(RadicalError::Dimension { got, want });
        }
        Ok(())
    }

    pub fn order(&self, q: u64) -> BigUint {
        let mut out = sp_order(self.m0 / 2, q);
        for p in &self.parts {
            out *= p.order(q);
        }
        out
    }

    pub fn render(&self) -> String {
        let p: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        format!("{} | {}", self.m0, p.join(" "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RadicalTag {
    Q1,
    Q2,
    Q3,
    Q11,
    Q21,
    Q111,
    /// Sylow ell-subgroup of the cyclic torus of order q^3 - eps.
    Q3Torus,
    /// Sylow ell-subgroup of the torus of order q^2 + 1.
    Q2Torus,
    P,
    R,
}

impl RadicalTag {
    pub fn name(self) -> &'static str {
        match self {
            RadicalTag::Q1 => "Q1",
            RadicalTag::Q2 => "Q2",
            RadicalTag::Q3 => "Q3",
            RadicalTag::Q11 => "Q11",
            RadicalTag::Q21 => "Q21",
            RadicalTag::Q111 => "Q111",
            RadicalTag::Q3Torus => "Q^3",
            RadicalTag::Q2Torus => "Q^2",
            RadicalTag::P => "P",
            RadicalTag::R => "R",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "Q1" => RadicalTag::Q1,
            "Q2" => RadicalTag::Q2,
            "Q3" => RadicalTag::Q3,
            "Q11" => RadicalTag::Q11,
            "Q21" => RadicalTag::Q21,
            "Q111" => RadicalTag::Q111,
            "Q^3" => RadicalTag::Q3Torus,
            "Q^2" => RadicalTag::Q2Torus,
            "P" => RadicalTag::P,
            "R" => RadicalTag::R,
            _ => return None,
        })
    }
}

impl fmt::Display for RadicalTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RadicalClass {
    pub tag: RadicalTag,
    #[serde(serialize_with = "crate::radicals::ser_big")]
    pub order: BigUint,
    #[serde(serialize_with = "crate::radicals::ser_big")]
    pub centralizer_order: BigUint,
    #[serde(serialize_with = "crate::radicals::ser_big")]
    pub normalizer_order: BigUint,
    pub is_sylow: bool,
}

pub fn ser_big<S: serde::Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_string())
}

fn gl_eps(eps: i8, n: u32) -> ShapePart {
    if eps == 1 {
        ShapePart {
            unitary: false,
            n,
            k: 1,
        }
    } else {
        ShapePart { unitary: true, n, k: 2 }
    }
}

fn shape(m0: u32, parts: Vec<ShapePart>) -> CentralizerShape {
    CentralizerShape { m0, parts }
}

fn big(x: u128) -> BigUint {
    BigUint::from(x)
}

/// ell-part of x as a BigUint.
fn lp(x: u128, ell: u64) -> BigUint {
    big(ell_part(x, ell).0)
}

/// The radical subgroup classes for the regime, in a fixed order.
pub fn radical_catalog(r: &PrimeRegime) -> Vec<RadicalClass> {
    let q = r.q();
    let qq = q as u128;
    let ell = r.ell;
    let ld = big(r.ell_d as u128);
    let mut out = Vec::new();
    let mut push = |tag, order: BigUint, c: BigUint, index: u64, sylow| {
        let normalizer_order = &c * BigUint::from(index);
        out.push(RadicalClass {
            tag,
            order,
            centralizer_order: c,
            normalizer_order,
            is_sylow: sylow,
        });
    };
    let family = r.group.family;
    if !r.divides_q2_minus_1() && r.epsilon.is_some() {
        // 3 != ell | q^2 + eps q + 1: a cyclic Sylow subgroup of the q^3 - eps torus.
        let eps = r.eps();
        let phi = if eps == 1 { qq * qq + qq + 1 } else { qq * qq - qq + 1 };
        let torus = if eps == 1 { qq * qq * qq - 1 } else { qq * qq * qq + 1 };
        push(RadicalTag::Q3Torus, lp(phi, ell), big(torus), 6, true);
        return out;
    }
    if r.epsilon.is_none() {
        let q2p1 = qq * qq + 1;
        let c = match family {
            Family::Sp6 => big(q2p1) * sp_order(1, q),
            Family::Sp4 => big(q2p1),
        };
        push(RadicalTag::Q2Torus, lp(q2p1, ell), c, 4, true);
        return out;
    }
    let eps = r.eps();
    let ld2 = &ld * &ld;
    match family {
        Family::Sp4 => {
            push(
                RadicalTag::Q1,
                ld.clone(),
                shape(2, vec![gl_eps(eps, 1)]).order(q),
                2,
                false,
            );
            push(
                RadicalTag::Q2,
                ld.clone(),
                shape(0, vec![gl_eps(eps, 2)]).order(q),
                2,
                false,
            );
            push(
                RadicalTag::Q11,
                ld2,
                shape(0, vec![gl_eps(eps, 1), gl_eps(eps, 1)]).order(q),
                8,
                true,
            );
        }
        Family::Sp6 => {
            let three = ell == 3;
            push(
                RadicalTag::Q1,
                ld.clone(),
                shape(4, vec![gl_eps(eps, 1)]).order(q),
                2,
                false,
            );
            push(
                RadicalTag::Q2,
                ld.clone(),
                shape(2, vec![gl_eps(eps, 2)]).order(q),
                2,
                false,
            );
            push(
                RadicalTag::Q3,
                ld.clone(),
                shape(0, vec![gl_eps(eps, 3)]).order(q),
                2,
                false,
            );
            push(
                RadicalTag::Q11,
                ld2.clone(),
                shape(2, vec![gl_eps(eps, 1), gl_eps(eps, 1)]).order(q),
                8,
                false,
            );
            push(
                RadicalTag::Q21,
                ld2.clone(),
                shape(0, vec![gl_eps(eps, 2), gl_eps(eps, 1)]).order(q),
                4,
                false,
            );
            push(
                RadicalTag::Q111,
                &ld2 * &ld,
                shape(0, vec![gl_eps(eps, 1); 3]).order(q),
                48,
                !three,
            );
            if three {
                let torus = if eps == 1 { qq * qq * qq - 1 } else { qq * qq * qq + 1 };
                let m = r.m;
                let d = r.d;
                push(RadicalTag::Q3Torus, big(3u128.pow(d + 1)), big(torus), 6, false);
                let qme = big(r.q_minus_eps() as u128);
                // P = K.C3 with |K| = 3^{3d}; N/P = (C_m:2) x C_2 and C_G(P) = Z(GL_3^eps).
                let p_order = big(3u128.pow(3 * d + 1));
                out.push(RadicalClass {
                    tag: RadicalTag::P,
                    normalizer_order: &p_order * BigUint::from(4 * m),
                    order: p_order,
                    centralizer_order: qme.clone(),
                    is_sylow: true,
                });
                // R = Z E with E extraspecial of order 27 and |Z| = 3^d; N/R = (C_m:2) x Sp2(3).
                let r_order = big(3u128.pow(d + 2));
                let n_order = &r_order * BigUint::from(48 * m);
                out.push(RadicalClass {
                    tag: RadicalTag::R,
                    order: r_order,
                    centralizer_order: qme,
                    normalizer_order: n_order,
                    is_sylow: false,
                });
            }
        }
    }
    out
}

/// Order of a Sylow ell-subgroup of G.
pub fn sylow_order(r: &PrimeRegime) -> BigUint {
    let ord = crate::arith::group_order(&r.group);
    BigUint::from(r.ell).pow(crate::arith::valuation_big(&ord, r.ell))
}

/// ell-part of |C| as a power of ell.
pub fn ell_part_of(n: &BigUint, ell: u64) -> BigUint {
    BigUint::from(ell).pow(crate::arith::valuation_big(n, ell))
}

pub fn is_power_of(n: &BigUint, ell: u64) -> bool {
    if n.is_one() {
        return true;
    }
    ell_part_of(n, ell) == *n
}

/// Exponent of ell in a machine integer.
pub fn val(n: u64, ell: u64) -> u32 {
    valuation(n as u128, ell)
}
