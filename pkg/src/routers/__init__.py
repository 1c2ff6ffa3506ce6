# routers package for API submodules
