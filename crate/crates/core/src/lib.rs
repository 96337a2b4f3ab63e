pub mod mscale;
pub mod raster;
pub mod igrid;
pub mod glp;
pub mod mindss;
pub mod reconstruct;
pub mod pipeline;
pub mod bench;
