use thiserror::Error;

/// Domain errors. Every variant names the offending parameter in its payload.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // series
    #[error("ZeroConstantTerm: {0}")]
    ZeroConstantTerm(String),
    #[error("NonzeroInnerConstant: {0}")]
    NonzeroInnerConstant(String),
    #[error("IndexBeyondTruncation: {0}")]
    IndexBeyondTruncation(String),
    #[error("NegativeCoefficient: {0}")]
    NegativeCoefficient(String),
    #[error("ParseError: {0}")]
    ParseError(String),

    // numerics
    #[error("DomainError: {0}")]
    DomainError(String),
    #[error("UnsupportedOrder: {0}")]
    UnsupportedOrder(String),
    #[error("BracketInvalid: {0}")]
    BracketInvalid(String),
    #[error("NoConvergence: {0}")]
    NoConvergence(String),

    // khinchin
    #[error("NoCoefficientAccess: {0}")]
    NoCoefficientAccess(String),
    #[error("RadiusOutOfRange: {0}")]
    RadiusOutOfRange(String),
    #[error("DerivativeOrderUnavailable: {0}")]
    DerivativeOrderUnavailable(String),
    #[error("ComplexEvalUnavailable: {0}")]
    ComplexEvalUnavailable(String),
    #[error("ZeroMean: {0}")]
    ZeroMean(String),
    #[error("NotEntire: {0}")]
    NotEntire(String),

    // catalog
    #[error("InvalidSpec: {0}")]
    InvalidSpec(String),
    #[error("TruncationTooLarge: {0}")]
    TruncationTooLarge(String),
    #[error("NoApproxAvailable: {0}")]
    NoApproxAvailable(String),
    #[error("NoAxisFormula: {0}")]
    NoAxisFormula(String),

    // asym
    #[error("TargetAboveMeanSup: {0}")]
    TargetAboveMeanSup(String),
    #[error("QGcdNotOne: {0}")]
    QGcdNotOne(String),
    #[error("GcdNotOne: {0}")]
    GcdNotOne(String),
    #[error("UnsupportedColoredOrder: {0}")]
    UnsupportedColoredOrder(String),
    #[error("WindowTooNarrow: {0}")]
    WindowTooNarrow(String),

    // large_powers
    #[error("BudgetExceeded: {0}")]
    BudgetExceeded(String),
    #[error("RatioOutOfBand: {0}")]
    RatioOutOfBand(String),
    #[error("QGcdViolation: {0}")]
    QGcdViolation(String),
    #[error("LAboveMeanSup: {0}")]
    LAboveMeanSup(String),
    #[error("BoundaryVarianceInfinite: {0}")]
    BoundaryVarianceInfinite(String),
    #[error("FirstCoefficientZero: {0}")]
    FirstCoefficientZero(String),
    #[error("RegimeMismatch: {0}")]
    RegimeMismatch(String),
    #[error("KTooLarge: {0}")]
    KTooLarge(String),
    #[error("NotUSG: {0}")]
    NotUSG(String),
    #[error("PrefactorRadiusTooSmall: {0}")]
    PrefactorRadiusTooSmall(String),
    #[error("NoApplicableRegime: {0}")]
    NoApplicableRegime(String),

    // lagrange
    #[error("MeanSupBelowOne: {0}")]
    MeanSupBelowOne(String),
    #[error("ZeroCoefficient: {0}")]
    ZeroCoefficient(String),
    #[error("IndexBelowJ: {0}")]
    IndexBelowJ(String),
    #[error("ParameterDomain: {0}")]
    ParameterDomain(String),
    #[error("SupercriticalSpec: {0}")]
    SupercriticalSpec(String),
}

impl Error {
    /// Variant name, e.g. `"RadiusOutOfRange"`.
    pub fn name(&self) -> &'static str {
        use Error::*;
        match self {
            ZeroConstantTerm(_) => "ZeroConstantTerm",
            NonzeroInnerConstant(_) => "NonzeroInnerConstant",
            IndexBeyondTruncation(_) => "IndexBeyondTruncation",
            NegativeCoefficient(_) => "NegativeCoefficient",
            ParseError(_) => "ParseError",
            DomainError(_) => "DomainError",
            UnsupportedOrder(_) => "UnsupportedOrder",
            BracketInvalid(_) => "BracketInvalid",
            NoConvergence(_) => "NoConvergence",
            NoCoefficientAccess(_) => "NoCoefficientAccess",
            RadiusOutOfRange(_) => "RadiusOutOfRange",
            DerivativeOrderUnavailable(_) => "DerivativeOrderUnavailable",
            ComplexEvalUnavailable(_) => "ComplexEvalUnavailable",
            ZeroMean(_) => "ZeroMean",
            NotEntire(_) => "NotEntire",
            InvalidSpec(_) => "InvalidSpec",
            TruncationTooLarge(_) => "TruncationTooLarge",
            NoApproxAvailable(_) => "NoApproxAvailable",
            NoAxisFormula(_) => "NoAxisFormula",
            TargetAboveMeanSup(_) => "TargetAboveMeanSup",
            QGcdNotOne(_) => "QGcdNotOne",
            GcdNotOne(_) => "GcdNotOne",
            UnsupportedColoredOrder(_) => "UnsupportedColoredOrder",
            WindowTooNarrow(_) => "WindowTooNarrow",
            BudgetExceeded(_) => "BudgetExceeded",
            RatioOutOfBand(_) => "RatioOutOfBand",
            QGcdViolation(_) => "QGcdViolation",
            LAboveMeanSup(_) => "LAboveMeanSup",
            BoundaryVarianceInfinite(_) => "BoundaryVarianceInfinite",
            FirstCoefficientZero(_) => "FirstCoefficientZero",
            RegimeMismatch(_) => "RegimeMismatch",
            KTooLarge(_) => "KTooLarge",
            NotUSG(_) => "NotUSG",
            PrefactorRadiusTooSmall(_) => "PrefactorRadiusTooSmall",
            NoApplicableRegime(_) => "NoApplicableRegime",
            MeanSupBelowOne(_) => "MeanSupBelowOne",
            ZeroCoefficient(_) => "ZeroCoefficient",
            IndexBelowJ(_) => "IndexBelowJ",
            ParameterDomain(_) => "ParameterDomain",
            SupercriticalSpec(_) => "SupercriticalSpec",
        }
    }

    /// Module that raises this error.
    pub fn module(&self) -> &'static str {
        use Error::*;
        match self {
            ZeroConstantTerm(_) | NonzeroInnerConstant(_) | IndexBeyondTruncation(_) | NegativeCoefficient(_) | ParseError(_) => {
                "series"
            }
            DomainError(_) | UnsupportedOrder(_) | BracketInvalid(_) | NoConvergence(_) => "numerics",
            NoCoefficientAccess(_)
            | RadiusOutOfRange(_)
            | DerivativeOrderUnavailable(_)
            | ComplexEvalUnavailable(_)
            | ZeroMean(_)
            | NotEntire(_) => "khinchin",
            InvalidSpec(_) | TruncationTooLarge(_) | NoApproxAvailable(_) | NoAxisFormula(_) => "catalog",
            TargetAboveMeanSup(_) | QGcdNotOne(_) | GcdNotOne(_) | UnsupportedColoredOrder(_) | WindowTooNarrow(_) => "asym",
            BudgetExceeded(_)
            | RatioOutOfBand(_)
            | QGcdViolation(_)
            | LAboveMeanSup(_)
            | BoundaryVarianceInfinite(_)
            | FirstCoefficientZero(_)
            | RegimeMismatch(_)
            | KTooLarge(_)
            | NotUSG(_)
            | PrefactorRadiusTooSmall(_)
            | NoApplicableRegime(_) => "large_powers",
            MeanSupBelowOne(_) | ZeroCoefficient(_) | IndexBelowJ(_) | ParameterDomain(_) | SupercriticalSpec(_) => "lagrange",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
