# Application layer - Inference pipeline services
