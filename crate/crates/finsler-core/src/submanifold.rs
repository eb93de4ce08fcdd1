//! Restriction of a projectively flat metric to a coordinate 2-plane.
//!
//! In projectively related coordinates every 2-plane through the origin is
//! totally geodesic: the spray is radial, so the transversal geodesic
//! coefficients vanish on the plane and the plane carries an induced spray
//! whose curvature is the in-plane part of the parent curvature. That makes
//! surface-level holonomy certificates transfer verbatim to the parent.

use crate::curvature;
use crate::error::{FinslerError, Result};
use crate::holonomy::certify::{certify_spec, CertificationReport, CertifyParams};
use crate::metrics::MetricSpec;
use crate::spray;

/// A coordinate 2-plane restriction of an ambient family.
#[derive(Clone, Debug)]
pub struct PlaneRestriction {
    pub parent: MetricSpec,
    pub plane: (usize, usize),
    pub restricted: MetricSpec,
}

/// Restrict a family to the coordinate plane spanned by axes `plane`.
///
/// Families whose closed form restricts coordinatewise produce a native 2D
/// family; a Randers one-form with components off the plane falls back to
/// numeric composition of the parent program with the embedding.
pub fn restrict(spec: &MetricSpec, plane: (usize, usize)) -> Result<PlaneRestriction> {
    let n = spec.dim();
    if n < 3 {
        return Err(FinslerError::UnsupportedFrame {
            reason: format!("parent dimension {n} leaves nothing to restrict"),
        });
    }
    if plane.0 == plane.1 || plane.0 >= n || plane.1 >= n {
        return Err(FinslerError::UnsupportedFrame {
            reason: format!("plane axes {plane:?} are not two distinct axes below {n}"),
        });
    }
    let restricted = match spec {
        MetricSpec::Euclidean { .. } => MetricSpec::Euclidean { n: 2 },
        MetricSpec::Klein { .. } => MetricSpec::Klein { n: 2 },
        MetricSpec::RandersShen { a, sign, .. } => {
            let off_plane = a
                .iter()
                .enumerate()
                .any(|(i, v)| i != plane.0 && i != plane.1 && v.abs() > 0.0);
            if off_plane {
                MetricSpec::Restricted {
                    parent: Box::new(spec.clone()),
                    plane,
                }
            } else {
                MetricSpec::randers(2, vec![a[plane.0], a[plane.1]], *sign)?
            }
        }
        MetricSpec::BryantShenPointwise { alpha, .. } => {
            // |y| cos α restricts to the same closed form on the plane.
            MetricSpec::BryantShenPointwise {
                n: 2,
                alpha: *alpha,
            }
        }
        MetricSpec::CustomPointwise(_) | MetricSpec::PolarProfilePointwise { .. } => {
            MetricSpec::Restricted {
                parent: Box::new(spec.clone()),
                plane,
            }
        }
        MetricSpec::Restricted { .. } => {
            return Err(FinslerError::UnsupportedFrame {
                reason: "cannot restrict an already restricted family".into(),
            })
        }
    };
    Ok(PlaneRestriction {
        parent: spec.clone(),
        plane,
        restricted,
    })
}

impl PlaneRestriction {
    /// Zero-pad in-plane coordinates into the parent chart.
    pub fn embed(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.parent.dim()];
        out[self.plane.0] = v[0];
        out[self.plane.1] = v[1];
        out
    }

    /// Sup-norm of the transversal geodesic coefficients G^σ of the parent
    /// at in-plane data, computed through the metric route so the check is
    /// independent of the radial closed form.
    pub fn transversal_spray_norm(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let xe = self.embed(x);
        let ye = self.embed(y);
        let g = spray::geodesic_coefficients_from_metric(&self.parent, &xe, &ye)?;
        Ok(g.iter()
            .enumerate()
            .filter(|(i, _)| *i != self.plane.0 && *i != self.plane.1)
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max))
    }

    /// Compare the restricted-spray curvature against the parent curvature
    /// evaluated at in-plane data: the in-plane components must coincide and
    /// the transversal components of the parent must vanish. Returns
    /// (in-plane residual, transversal norm).
    pub fn curvature_extension_residual(
        &self,
        x: &[f64],
        y: &[f64],
        xv: &[f64],
        yv: &[f64],
    ) -> Result<(f64, f64)> {
        let bar = curvature::riemann_curvature(&self.restricted, x, y)?;
        let xi_bar = bar.contract(xv, yv);

        let parent_r =
            curvature::riemann_curvature(&self.parent, &self.embed(x), &self.embed(y))?;
        let xi_parent = parent_r.contract(&self.embed(xv), &self.embed(yv));

        let mut in_plane = 0.0f64;
        in_plane = in_plane.max((xi_bar[0] - xi_parent[self.plane.0]).abs());
        in_plane = in_plane.max((xi_bar[1] - xi_parent[self.plane.1]).abs());

        let transversal = xi_parent
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != self.plane.0 && *i != self.plane.1)
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max);
        Ok((in_plane, transversal))
    }

    /// Run the surface certification on the restricted family; the verdict
    /// transfers to the parent because the plane is totally geodesic.
    pub fn certify(&self, params: &CertifyParams) -> Result<CertificationReport> {
        certify_spec(&self.restricted, params)
    }
}

/// Restrict, then certify in one step.
pub fn certify_via_plane(
    spec: &MetricSpec,
    plane: (usize, usize),
    params: &CertifyParams,
) -> Result<CertificationReport> {
    restrict(spec, plane)?.certify(params)
}
