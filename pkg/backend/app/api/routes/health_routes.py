from fastapi import APIRouter, status

from backend.app.models import HealthResponse

router = APIRouter()


@router.get("/health", status_code=status.HTTP_200_OK, response_model=HealthResponse)
async def health_check() -> HealthResponse:
    return HealthResponse(status="ok")
