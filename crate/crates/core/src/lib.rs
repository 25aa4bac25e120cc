//! Design and analysis toolkit for traveling-wave parametric amplifiers built
//! from nonlinear kinetic-inductance artificial transmission lines.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod circuit;
pub mod fwm;
pub mod io;
pub mod linear;
