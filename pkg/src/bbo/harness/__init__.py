from .jobs import Job, StudyConfig, enumerate_studies, make_jobs, schedule
from .runner import SearchResult, TrialRecord, budget_check, run_search, run_study

__all__ = [
    "Job",
    "StudyConfig",
    "SearchResult",
    "TrialRecord",
    "budget_check",
    "enumerate_studies",
    "make_jobs",
    "run_search",
    "run_study",
    "schedule",
]
