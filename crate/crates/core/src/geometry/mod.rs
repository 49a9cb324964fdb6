//! Charts, fields and exterior calculus.

pub mod basis;
pub mod chart;
pub mod fields;
pub mod forms;
pub mod linalg;

pub use chart::{ChartDomain, ManifoldSpec};
pub use fields::*;
pub use forms::{
    component, exterior_derivative, interior_product, lie_derivative, pullback, scaled, sum, wedge,
    ConstantForm, ExteriorDerivative, FunctionForm, InteriorProduct, LieDerivative, Pullback,
    Scaled, Sum, Wedge,
};
