pub mod check;
pub mod empirical;
pub mod simulate;
pub mod theory;
