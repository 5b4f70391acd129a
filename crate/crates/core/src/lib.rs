pub mod linalg;
pub mod complexes;
pub mod simplicial;
pub mod symbolic;
pub mod theories;
pub mod moduli;
pub mod gluing;
pub mod cli;
