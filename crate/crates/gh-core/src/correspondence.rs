//! Correspondences and map pairs between finite metric spaces.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::Caps;
use crate::error::GhError;
use crate::exponent::Exponent;
use crate::scalar::Scalar;
use crate::space::FiniteMetricSpace;
use crate::Result;

/// A correspondence between an `nx`-point and an `ny`-point space: a relation
/// whose projections onto both sides are surjective.
///
/// The relation is stored as bitset rows (one row per left point). Optional
/// factor structure records that both sides are lexicographically ordered
/// products, which is what coordinate projection needs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Correspondence {
    nx: usize,
    ny: usize,
    words_per_row: usize,
    bits: Vec<u64>,
    x_factors: Option<Vec<usize>>,
    y_factors: Option<Vec<usize>>,
}

impl Correspondence {
    /// Builds from related pairs, enforcing double surjectivity.
    pub fn new(nx: usize, ny: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut c = Self::empty(nx, ny)?;
        for &(i, j) in pairs {
            if i >= nx {
                return Err(GhError::MapOutOfRange {
                    index: i,
                    value: i,
                    n: nx,
                });
            }
            if j >= ny {
                return Err(GhError::MapOutOfRange {
                    index: j,
                    value: j,
                    n: ny,
                });
            }
            c.set(i, j);
        }
        c.check_surjective()?;
        Ok(c)
    }

    fn empty(nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(GhError::EmptySpace);
        }
        let words_per_row = ny.div_ceil(64);
        Ok(Correspondence {
            nx,
            ny,
            words_per_row,
            bits: vec![0u64; nx * words_per_row],
            x_factors: None,
            y_factors: None,
        })
    }

    /// The identity correspondence on an `n`-point space.
    pub fn identity(n: usize) -> Self {
        let mut c = Self::empty(n, n).expect("n >= 1");
        for i in 0..n {
            c.set(i, i);
        }
        c
    }

    /// The full relation relating every pair.
    pub fn full(nx: usize, ny: usize) -> Self {
        let mut c = Self::empty(nx, ny).expect("sizes >= 1");
        for i in 0..nx {
            for j in 0..ny {
                c.set(i, j);
            }
        }
        c
    }

    /// Builds from a flat row-major relation bitmask (bit `i*ny + j` relates
    /// `(i, j)`); requires `nx * ny <= 63`. Used by the subset solver.
    pub(crate) fn from_mask(mask: u64, nx: usize, ny: usize) -> Result<Self> {
        let mut c = Self::empty(nx, ny)?;
        for i in 0..nx {
            for j in 0..ny {
                if mask >> (i * ny + j) & 1 == 1 {
                    c.set(i, j);
                }
            }
        }
        c.check_surjective()?;
        Ok(c)
    }

    fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words_per_row + j / 64] |= 1u64 << (j % 64);
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words_per_row + j / 64] >> (j % 64) & 1 == 1
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    fn check_surjective(&self) -> Result<()> {
        for i in 0..self.nx {
            let row = &self.bits[i * self.words_per_row..(i + 1) * self.words_per_row];
            if row.iter().all(|&w| w == 0) {
                return Err(GhError::NotSurjective {
                    side: "left point",
                    index: i,
                });
            }
        }
        let mut cols = vec![0u64; self.words_per_row];
        for i in 0..self.nx {
            for (w, c) in self.bits[i * self.words_per_row..(i + 1) * self.words_per_row]
                .iter()
                .zip(cols.iter_mut())
            {
                *c |= w;
            }
        }
        for j in 0..self.ny {
            if cols[j / 64] >> (j % 64) & 1 == 0 {
                return Err(GhError::NotSurjective {
                    side: "right point",
                    index: j,
                });
            }
        }
        Ok(())
    }

    /// Related pairs in row-major order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.nx {
            for j in 0..self.ny {
                if self.contains(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn pair_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// True when every pair of `self` is also related in `other`.
    pub fn is_subrelation_of(&self, other: &Correspondence) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self
                .bits
                .iter()
                .zip(other.bits.iter())
                .all(|(a, b)| a & !b == 0)
    }

    /// Attaches product factor structure: both sides are lexicographic
    /// products with the given factor sizes.
    pub fn with_factor_structure(
        mut self,
        x_factors: Vec<usize>,
        y_factors: Vec<usize>,
    ) -> Result<Self> {
        let px: usize = x_factors.iter().product();
        let py: usize = y_factors.iter().product();
        if px != self.nx || x_factors.is_empty() {
            return Err(GhError::SizeMismatch {
                what: "x factor sizes",
                expected: self.nx,
                got: px,
            });
        }
        if py != self.ny || y_factors.len() != x_factors.len() {
            return Err(GhError::SizeMismatch {
                what: "y factor sizes",
                expected: self.ny,
                got: py,
            });
        }
        self.x_factors = Some(x_factors);
        self.y_factors = Some(y_factors);
        Ok(self)
    }

    pub fn factor_structure(&self) -> Option<(&[usize], &[usize])> {
        match (&self.x_factors, &self.y_factors) {
            (Some(x), Some(y)) => Some((x.as_slice(), y.as_slice())),
            _ => None,
        }
    }
}

impl Serialize for Correspondence {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("Correspondence", 3)?;
        s.serialize_field("nx", &self.nx)?;
        s.serialize_field("ny", &self.ny)?;
        s.serialize_field("pairs", &self.pairs())?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for Correspondence {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Dto {
            nx: usize,
            ny: usize,
            pairs: Vec<(usize, usize)>,
        }
        let dto = Dto::deserialize(deserializer)?;
        Correspondence::new(dto.nx, dto.ny, &dto.pairs).map_err(D::Error::custom)
    }
}

/// Distortion of a correspondence: the largest `|d_X(x,x') - d_Y(y,y')|` over
/// related pairs `(x,y)` and `(x',y')`.
pub fn distortion<T: Scalar>(
    r: &Correspondence,
    x: &FiniteMetricSpace<T>,
    y: &FiniteMetricSpace<T>,
) -> Result<T> {
    if r.nx() != x.len() {
        return Err(GhError::SizeMismatch {
            what: "correspondence left side",
            expected: r.nx(),
            got: x.len(),
        });
    }
    if r.ny() != y.len() {
        return Err(GhError::SizeMismatch {
            what: "correspondence right side",
            expected: r.ny(),
            got: y.len(),
        });
    }
    let pairs = r.pairs();
    let mut worst = T::zero();
    for (a, &(i, j)) in pairs.iter().enumerate() {
        for &(k, l) in &pairs[a..] {
            let diff = (x.d(i, k) - y.d(j, l)).abs();
            worst = worst.max(diff);
        }
    }
    Ok(worst)
}

/// A pair of maps `f: X -> Y` and `g: Y -> X`, stored as index arrays.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MapPair {
    f: Vec<usize>,
    g: Vec<usize>,
}

impl MapPair {
    /// `f.len()` is the size of `X`, `g.len()` the size of `Y`; both maps are
    /// total, with values validated against the opposite side.
    pub fn new(f: Vec<usize>, g: Vec<usize>) -> Result<Self> {
        if f.is_empty() || g.is_empty() {
            return Err(GhError::EmptySpace);
        }
        let (nx, ny) = (f.len(), g.len());
        for (index, &v) in f.iter().enumerate() {
            if v >= ny {
                return Err(GhError::MapOutOfRange { index, value: v, n: ny });
            }
        }
        for (index, &v) in g.iter().enumerate() {
            if v >= nx {
                return Err(GhError::MapOutOfRange { index, value: v, n: nx });
            }
        }
        Ok(MapPair { f, g })
    }

    pub fn f(&self) -> &[usize] {
        &self.f
    }

    pub fn g(&self) -> &[usize] {
        &self.g
    }

    pub fn nx(&self) -> usize {
        self.f.len()
    }

    pub fn ny(&self) -> usize {
        self.g.len()
    }
}

impl<'de> Deserialize<'de> for MapPair {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Dto {
            f: Vec<usize>,
            g: Vec<usize>,
        }
        let dto = Dto::deserialize(deserializer)?;
        MapPair::new(dto.f, dto.g).map_err(D::Error::custom)
    }
}

/// The three distortion components of a map pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MapDistortions<T> {
    /// `sup |d_X(x,x') - d_Y(f x, f x')|`.
    pub dis_f: T,
    /// `sup |d_Y(y,y') - d_X(g y, g y')|`.
    pub dis_g: T,
    /// `sup |d_X(x, g y) - d_Y(f x, y)|`.
    pub codis: T,
}

impl<T: Scalar> MapDistortions<T> {
    pub fn max(&self) -> T {
        self.dis_f.max(self.dis_g).max(self.codis)
    }
}

fn check_map_sizes<T: Scalar>(
    fp: &MapPair,
    x: &FiniteMetricSpace<T>,
    y: &FiniteMetricSpace<T>,
) -> Result<()> {
    if fp.nx() != x.len() {
        return Err(GhError::SizeMismatch {
            what: "map f domain",
            expected: x.len(),
            got: fp.nx(),
        });
    }
    if fp.ny() != y.len() {
        return Err(GhError::SizeMismatch {
            what: "map g domain",
            expected: y.len(),
            got: fp.ny(),
        });
    }
    Ok(())
}

/// Exact distortions of `f`, `g` and their codistortion, each a maximum over
/// all point pairs.
pub fn map_distortions<T: Scalar>(
    fp: &MapPair,
    x: &FiniteMetricSpace<T>,
    y: &FiniteMetricSpace<T>,
) -> Result<MapDistortions<T>> {
    check_map_sizes(fp, x, y)?;
    let (nx, ny) = (x.len(), y.len());
    let mut dis_f = T::zero();
    for i in 0..nx {
        for k in (i + 1)..nx {
            dis_f = dis_f.max((x.d(i, k) - y.d(fp.f[i], fp.f[k])).abs());
        }
    }
    let mut dis_g = T::zero();
    for j in 0..ny {
        for l in (j + 1)..ny {
            dis_g = dis_g.max((y.d(j, l) - x.d(fp.g[j], fp.g[l])).abs());
        }
    }
    let mut codis = T::zero();
    for i in 0..nx {
        for j in 0..ny {
            codis = codis.max((x.d(i, fp.g[j]) - y.d(fp.f[i], j)).abs());
        }
    }
    Ok(MapDistortions { dis_f, dis_g, codis })
}

/// The correspondence induced by a map pair: the graph of `f` united with the
/// reversed graph of `g`. Its distortion equals
/// `max(dis f, dis g, codis(f,g))`.
pub fn correspondence_from_maps(fp: &MapPair) -> Correspondence {
    let (nx, ny) = (fp.nx(), fp.ny());
    let mut c = Correspondence::empty(nx, ny).expect("nonempty maps");
    for (i, &j) in fp.f.iter().enumerate() {
        c.set(i, j);
    }
    for (j, &i) in fp.g.iter().enumerate() {
        c.set(i, j);
    }
    c
}

/// Componentwise product of correspondences between lexicographic products:
/// tuples are related exactly when every coordinate pair is related.
///
/// The result's distortion never exceeds the l^p norm of the part
/// distortions; debug builds assert this against the supplied factor spaces.
pub fn product_correspondence<T: Scalar>(
    parts: &[Correspondence],
    p: Exponent<T>,
    xs: &[FiniteMetricSpace<T>],
    ys: &[FiniteMetricSpace<T>],
    caps: &Caps,
) -> Result<Correspondence> {
    if parts.is_empty() {
        return Err(GhError::EmptyProduct);
    }
    if xs.len() != parts.len() || ys.len() != parts.len() {
        return Err(GhError::SizeMismatch {
            what: "product correspondence factors",
            expected: parts.len(),
            got: xs.len().min(ys.len()),
        });
    }
    for (k, part) in parts.iter().enumerate() {
        if part.nx() != xs[k].len() || part.ny() != ys[k].len() {
            return Err(GhError::SizeMismatch {
                what: "factor correspondence",
                expected: xs[k].len(),
                got: part.nx(),
            });
        }
    }

    let x_sizes: Vec<usize> = parts.iter().map(|r| r.nx()).collect();
    let y_sizes: Vec<usize> = parts.iter().map(|r| r.ny()).collect();
    let nx: usize = x_sizes.iter().product();
    let ny: usize = y_sizes.iter().product();
    for (total, name) in [(nx, "product correspondence left"), (ny, "product correspondence right")]
    {
        if total > caps.product_points {
            return Err(GhError::CapExceeded {
                what: name,
                required: total as f64,
                cap: caps.product_points as f64,
            });
        }
    }

    let xi = crate::space::product_index(&x_sizes);
    let yi = crate::space::product_index(&y_sizes);
    let mut c = Correspondence::empty(nx, ny)?;
    for u in 0..nx {
        'pair: for v in 0..ny {
            for (k, part) in parts.iter().enumerate() {
                if !part.contains(xi.coord(u, k), yi.coord(v, k)) {
                    continue 'pair;
                }
            }
            c.set(u, v);
        }
    }
    let c = c.with_factor_structure(x_sizes, y_sizes)?;

    #[cfg(debug_assertions)]
    {
        let x_prod = crate::space::lp_product(
            &crate::space::ProductSpec::plain(p, xs.to_vec()),
            caps,
        )?;
        let y_prod = crate::space::lp_product(
            &crate::space::ProductSpec::plain(p, ys.to_vec()),
            caps,
        )?;
        let dis_parts: Vec<T> = parts
            .iter()
            .enumerate()
            .map(|(k, r)| distortion(r, &xs[k], &ys[k]).expect("sizes checked"))
            .collect();
        let bound = p.norm(&dis_parts);
        let dis = distortion(&c, &x_prod, &y_prod).expect("sizes match");
        debug_assert!(
            dis <= bound + T::from_f64_lossy(1e-12),
            "product correspondence distortion {dis} exceeds norm bound {bound}"
        );
    }
    #[cfg(not(debug_assertions))]
    {
        let _ = p;
    }

    Ok(c)
}

/// Projects a product correspondence onto factor `k`.
pub fn project_correspondence(r: &Correspondence, k: usize) -> Result<Correspondence> {
    let (x_sizes, y_sizes) = r.factor_structure().ok_or(GhError::NotAProduct)?;
    if k >= x_sizes.len() {
        return Err(GhError::FactorOutOfRange {
            index: k,
            count: x_sizes.len(),
        });
    }
    let xi = crate::space::product_index(x_sizes);
    let yi = crate::space::product_index(y_sizes);
    let mut c = Correspondence::empty(x_sizes[k], y_sizes[k])?;
    for u in 0..r.nx() {
        for v in 0..r.ny() {
            if r.contains(u, v) {
                c.set(xi.coord(u, k), yi.coord(v, k));
            }
        }
    }
    // Projection of a doubly surjective relation on full products stays
    // doubly surjective.
    c.check_surjective()?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{lp_product, simplex, ProductSpec};

    #[test]
    fn constructor_enforces_double_surjectivity() {
        assert!(Correspondence::new(2, 2, &[(0, 0), (1, 1)]).is_ok());
        let err = Correspondence::new(2, 2, &[(0, 0), (0, 1)]).unwrap_err();
        assert!(matches!(
            err,
            GhError::NotSurjective { side: "left point", index: 1 }
        ));
        let err = Correspondence::new(2, 2, &[(0, 0), (1, 0)]).unwrap_err();
        assert!(matches!(
            err,
            GhError::NotSurjective { side: "right point", index: 1 }
        ));
    }

    #[test]
    fn identity_distortion_is_zero() {
        let x = simplex::<f64>(3);
        let r = Correspondence::identity(3);
        assert_eq!(distortion(&r, &x, &x).unwrap(), 0.0);
    }

    #[test]
    fn distortion_of_collapsing_correspondence() {
        // x1 related to y1 and y2; x2 related to y3.
        let x = simplex::<f64>(2);
        let y = simplex::<f64>(3);
        let r = Correspondence::new(2, 3, &[(0, 0), (0, 1), (1, 2)]).unwrap();
        assert_eq!(distortion(&r, &x, &y).unwrap(), 1.0);
    }

    #[test]
    fn distortion_between_scaled_two_point_spaces() {
        let x = simplex::<f64>(2);
        let y = x.scale(2.0).unwrap();
        let r = Correspondence::identity(2);
        assert_eq!(distortion(&r, &x, &y).unwrap(), 1.0);
    }

    #[test]
    fn distortion_checks_sizes() {
        let x = simplex::<f64>(2);
        let y = simplex::<f64>(3);
        let r = Correspondence::identity(2);
        assert!(matches!(
            distortion(&r, &x, &y),
            Err(GhError::SizeMismatch { .. })
        ));
    }

    #[test]
    fn map_pair_validation() {
        assert!(MapPair::new(vec![0, 1], vec![0, 1]).is_ok());
        let err = MapPair::new(vec![0, 2], vec![0, 0]).unwrap_err();
        assert!(matches!(
            err,
            GhError::MapOutOfRange { index: 1, value: 2, n: 2 }
        ));
    }

    #[test]
    fn map_distortions_for_collapsing_g() {
        // f injective from 2 to 3 points, g collapses y2 and y3 onto x2.
        let x = simplex::<f64>(2);
        let y = simplex::<f64>(3);
        let fp = MapPair::new(vec![0, 1], vec![0, 1, 1]).unwrap();
        let d = map_distortions(&fp, &x, &y).unwrap();
        assert_eq!(d.dis_f, 0.0);
        assert_eq!(d.dis_g, 1.0);
        assert_eq!(d.codis, 1.0);
        assert_eq!(d.max(), 1.0);
    }

    #[test]
    fn induced_correspondence_merges_graphs() {
        let fp = MapPair::new(vec![0, 1], vec![0, 1, 1]).unwrap();
        let r = correspondence_from_maps(&fp);
        // Distinct related pairs: (0,0), (1,1), (1,2).
        assert_eq!(r.pairs(), vec![(0, 0), (1, 1), (1, 2)]);
        assert!(r.contains(1, 1) && r.contains(1, 2));
    }

    #[test]
    fn induced_distortion_matches_component_maximum() {
        let x = simplex::<f64>(2);
        let y = simplex::<f64>(3);
        let fp = MapPair::new(vec![0, 1], vec![0, 1, 1]).unwrap();
        let r = correspondence_from_maps(&fp);
        let d = map_distortions(&fp, &x, &y).unwrap();
        assert_eq!(distortion(&r, &x, &y).unwrap(), d.max());
    }

    #[test]
    fn product_correspondence_respects_norm_bound() {
        let caps = Caps::default();
        let d2 = simplex::<f64>(2);
        let y1 = d2.scale(2.0).unwrap();
        let y2 = d2.scale(1.5).unwrap();
        let r1 = Correspondence::identity(2);
        let r2 = Correspondence::identity(2);
        let xs = [d2.clone(), d2.clone()];
        let ys = [y1.clone(), y2.clone()];
        let r = product_correspondence(
            &[r1, r2],
            Exponent::Finite(1.0),
            &xs,
            &ys,
            &caps,
        )
        .unwrap();
        let xp = lp_product(&ProductSpec::plain(Exponent::Finite(1.0), xs.to_vec()), &caps)
            .unwrap();
        let yp = lp_product(&ProductSpec::plain(Exponent::Finite(1.0), ys.to_vec()), &caps)
            .unwrap();
        let dis = distortion(&r, &xp, &yp).unwrap();
        assert_eq!(dis, 1.5);
        assert!(dis <= 1.0 + 0.5);
    }

    #[test]
    fn projection_recovers_identity() {
        let caps = Caps::default();
        let d2 = simplex::<f64>(2);
        let xs = [d2.clone(), d2.clone()];
        let r = product_correspondence(
            &[Correspondence::identity(2), Correspondence::identity(2)],
            Exponent::<f64>::Infinity,
            &xs,
            &xs,
            &caps,
        )
        .unwrap();
        for k in 0..2 {
            let proj = project_correspondence(&r, k).unwrap();
            assert_eq!(proj, Correspondence::identity(2));
        }
        assert!(matches!(
            project_correspondence(&r, 2),
            Err(GhError::FactorOutOfRange { .. })
        ));
    }

    #[test]
    fn projection_requires_factor_structure() {
        let r = Correspondence::identity(4);
        assert!(matches!(
            project_correspondence(&r, 0),
            Err(GhError::NotAProduct)
        ));
        let r = Correspondence::identity(4)
            .with_factor_structure(vec![2, 2], vec![2, 2])
            .unwrap();
        assert!(project_correspondence(&r, 0).is_ok());
    }

    #[test]
    fn subrelation_check() {
        let small = Correspondence::new(2, 2, &[(0, 0), (1, 1)]).unwrap();
        let big = Correspondence::full(2, 2);
        assert!(small.is_subrelation_of(&big));
        assert!(!big.is_subrelation_of(&small));
    }

    #[test]
    fn witness_serialization_round_trips() {
        let r = Correspondence::new(2, 3, &[(0, 0), (0, 1), (1, 2)]).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(json, r#"{"nx":2,"ny":3,"pairs":[[0,0],[0,1],[1,2]]}"#);
        let back: Correspondence = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);

        let fp = MapPair::new(vec![0, 1], vec![0, 1, 1]).unwrap();
        let json = serde_json::to_string(&fp).unwrap();
        let back: MapPair = serde_json::from_str(&json).unwrap();
        assert_eq!(back, fp);
    }
}
