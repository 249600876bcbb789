"""HTTP service layer (FastAPI) around the crashnet core."""
