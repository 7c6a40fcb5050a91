# Application unit tests