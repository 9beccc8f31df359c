from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from routes.interpretation_routes import router as interpretation_router
from routes.circuit_routes import router as circuit_router
from routes.semantics_routes import router as semantics_router
from routes.rewrite_routes import router as rewrite_router
from routes.mealy_routes import router as mealy_router
from routes.synthesis_routes import router as synthesis_router

app = FastAPI(
    title="Lattice Circuits API",
    description="Simulate, rewrite, translate and synthesize sequential circuits over finite lattices",
    version="1.0.0"
)

# Configure CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],  # Configure this appropriately for production
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Include routers
app.include_router(interpretation_router, prefix="/interpretation", tags=["Interpretation"])
app.include_router(circuit_router, prefix="/circuit", tags=["Circuit"])
app.include_router(semantics_router, prefix="/semantics", tags=["Semantics"])
app.include_router(rewrite_router, prefix="/rewrite", tags=["Rewrite"])
app.include_router(mealy_router, prefix="/mealy", tags=["Mealy"])
app.include_router(synthesis_router, prefix="/synthesis", tags=["Synthesis"])

@app.get("/")
async def root():
    return {"message": "Lattice Circuits API", "version": "1.0.0"}

@app.get("/health")
async def health_check():
    return {"status": "healthy"}

if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="127.0.0.1", port=28080)
