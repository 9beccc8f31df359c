from typing import Optional

from pydantic import BaseModel, Field


class RunConfig(BaseModel):
    """Settings shared by every CLI subcommand"""
    lattice_path: Optional[str] = Field(default=None, description="Lattice file; Belnap when absent")
    interp_path: Optional[str] = Field(default=None, description="Interpretation file; Belnap when absent")
    ticks: int = Field(default=8, gt=0, description="Ticks to simulate or reduce")
    equiv_budget: int = Field(default=2 ** 20, gt=0, description="Largest number of input words the bounded check explores")
    derivative_budget: int = Field(default=4096, gt=0, description="Largest number of residuals synthesis explores")
    seed: int = Field(default=0, ge=0, description="Seed for generated corpora")
    emit_trace: Optional[str] = Field(default=None, description="File receiving the reduction trace")
    window: int = Field(default=4, gt=0, description="Default input window of prefix-periodic specs")
    extra_iterations: int = Field(default=0, ge=0, description="Iterations beyond the chain height in instant feedback")
    verify_limit: int = Field(default=4096, gt=0, description="Largest domain realized tables are checked on exhaustively")
    verbose: bool = Field(default=False, description="Log at debug level")
