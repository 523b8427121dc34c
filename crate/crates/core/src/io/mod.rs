pub mod framelog;
pub mod text;
