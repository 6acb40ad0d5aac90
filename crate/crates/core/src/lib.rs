pub mod coeffring;
pub mod golden;
pub mod logform;
pub mod modfun;
pub mod mp;
pub mod ncsymbol;
pub mod parametrix;
pub mod quad;
pub mod reduce;
pub mod torusnum;
