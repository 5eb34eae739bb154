"""
Pydantic schemas for evaluation reports.
"""

from pydantic import BaseModel, ConfigDict, Field


class MetricsReport(BaseModel):
    """Threshold metrics plus AUC for one scored dataset."""

    model_config = ConfigDict(frozen=True)

    auc: float | None = Field(None, ge=0.0, le=1.0, description="None when a class is missing")
    f1: float = Field(..., ge=0.0, le=1.0)
    recall_pos: float = Field(..., ge=0.0, le=1.0, description="Recall+ on security patches")
    recall_neg: float = Field(..., ge=0.0, le=1.0, description="Recall- on non-security patches")
    tpr: float = Field(..., ge=0.0, le=1.0, description="tp / (tp + fn); equals recall_pos")
    fpr: float = Field(..., ge=0.0, le=1.0, description="fp / (fp + tn)")
    precision: float = Field(..., ge=0.0, le=1.0)
    tp: int = Field(..., ge=0)
    fp: int = Field(..., ge=0)
    tn: int = Field(..., ge=0)
    fn: int = Field(..., ge=0)
    support_pos: int = Field(0, ge=0, description="tp + fn")
    support_neg: int = Field(0, ge=0, description="tn + fp")
    threshold: float
    flags: list[str] = Field(default_factory=list, description="Degenerate quantities reported as 0")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_record(self) -> dict:
        """Flat key/value record with stable key names."""
        return self.model_dump()

    def format_table(self) -> str:
        """Human-readable block used by the CLI."""
        auc = "n/a" if self.auc is None else f"{self.auc * 100:.2f}"
        lines = [
            f"AUC       {auc}",
            f"F1        {self.f1 * 100:.2f}",
            f"Recall+   {self.recall_pos * 100:.2f}",
            f"Recall-   {self.recall_neg * 100:.2f}",
            f"TPR       {self.tpr * 100:.2f}",
            f"FPR       {self.fpr * 100:.2f}",
            f"Precision {self.precision * 100:.2f}",
            f"tp={self.tp} fp={self.fp} tn={self.tn} fn={self.fn} threshold={self.threshold}",
            f"support: {self.support_pos} security / {self.support_neg} non-security ({self.total} total)",
        ]
        if self.flags:
            lines.append(f"flags: {', '.join(self.flags)}")
        return "\n".join(lines)
