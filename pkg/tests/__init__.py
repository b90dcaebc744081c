# CRFVE Tests
